#pragma once

#include "error.hpp"
#include "matrix.hpp"
#include "linalg.hpp"
#include "special.hpp"
#include "random.hpp"
#include "parallel.hpp"
#include "bipartite.hpp"
#include "inequalities.hpp"
#include "schrodinger.hpp"
#include "asymptotics.hpp"
