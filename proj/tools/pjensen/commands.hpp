#pragma once

// Subcommands of the pjensen tool. Everything here returns an exit code and
// writes to the supplied streams, so tests can run commands in-process.
//
//   0  success
//   1  a property violation was detected
//   2  usage error (bad flags, invalid parameter regime)

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <partial_jensen/partial_jensen.hpp>

namespace pj::cli {

using json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formatting and small parsers
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal; "inf" for infinities.
inline std::string format_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// x rounded to 15 significant digits, so closed forms print cleanly.
inline double round_significant(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

inline std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double value = 0.0;
        const auto* first = item.data();
        const auto* last = item.data() + item.size();
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(value)) {
            throw UsageError(std::string("invalid number '") + item + "' in " + what);
        }
        out.push_back(value);
    }
    return out;
}

inline BipartiteDims parse_dims(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw UsageError("--dims expects MxN, got '" + text + "'");
    BipartiteDims dims;
    try {
        std::size_t used = 0;
        dims.dim1 = std::stoul(text.substr(0, x), &used);
        if (used != x) throw std::invalid_argument("m");
        const std::string rest = text.substr(x + 1);
        dims.dim2 = std::stoul(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("n");
    } catch (const std::logic_error&) {
        throw UsageError("--dims expects MxN, got '" + text + "'");
    }
    if (dims.dim1 == 0 || dims.dim2 == 0 || dims.total() > kMaxBipartiteDim) {
        throw UsageError("--dims must be positive with M*N <= " + std::to_string(kMaxBipartiteDim));
    }
    return dims;
}

inline std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Writes to --out when given, else to the command's stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot open output file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

// ---------------------------------------------------------------------------
// Potential configuration
// ---------------------------------------------------------------------------

/// Line-based potential description, e.g.
///
///   variant homogeneous        variant separate
///   gamma 2                    alpha 1
///   dim 1                      beta 2
///   profile 1 1                profile 1 1 1 1
///
/// For dim 2 the profile lists Fourier coefficients a0 a1 b1 a2 b2 ... of
/// F(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta).
struct PotentialConfig {
    std::string variant = "homogeneous";
    double gamma = 2.0;
    int dim = 1;
    double alpha = 1.0;
    double beta = 2.0;
    std::vector<double> profile;

    HomogeneousPotential homogeneous() const {
        if (variant != "homogeneous") throw UsageError("this command needs a homogeneous potential");
        if (dim == 1) {
            const std::vector<double> p = profile.empty() ? std::vector<double>{1.0, 1.0} : profile;
            if (p.size() != 2) throw UsageError("1D profile needs two values F(+1) F(-1)");
            return HomogeneousPotential::line(gamma, p[0], p[1]);
        }
        if (dim != 2) throw UsageError("dim must be 1 or 2");
        const std::vector<double> c = profile.empty() ? std::vector<double>{1.0} : profile;
        return HomogeneousPotential::plane(gamma, [c](double theta) {
            double f = c[0];
            for (std::size_t i = 1; i < c.size(); ++i) {
                const double k = static_cast<double>((i + 1) / 2);
                f += c[i] * (i % 2 == 1 ? std::cos(k * theta) : std::sin(k * theta));
            }
            return std::max(0.0, f);
        });
    }

    SeparatelyHomogeneous separate() const {
        const std::vector<double> p = profile.empty() ? std::vector<double>{1.0, 1.0, 1.0, 1.0} : profile;
        if (p.size() != 4) throw UsageError("separately homogeneous profile needs four values F(++) F(+-) F(-+) F(--)");
        return SeparatelyHomogeneous::make(alpha, beta, {p[0], p[1], p[2], p[3]});
    }
};

inline PotentialConfig read_potential_config(std::istream& is) {
    PotentialConfig c;
    std::string line;
    while (std::getline(is, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto value = [&]() {
            double v = 0.0;
            if (!(ls >> v)) throw UsageError("potential file: missing value for '" + key + "'");
            return v;
        };
        if (key == "variant") {
            ls >> c.variant;
            if (c.variant == "separately_homogeneous") c.variant = "separate";
            if (c.variant != "homogeneous" && c.variant != "separate")
                throw UsageError("potential file: unknown variant '" + c.variant + "'");
        } else if (key == "gamma") {
            c.gamma = value();
        } else if (key == "dim") {
            c.dim = static_cast<int>(value());
        } else if (key == "alpha") {
            c.alpha = value();
        } else if (key == "beta") {
            c.beta = value();
        } else if (key == "profile") {
            c.profile.clear();
            double v = 0.0;
            while (ls >> v) c.profile.push_back(v);
        } else {
            throw UsageError("potential file: unknown key '" + key + "'");
        }
    }
    return c;
}

inline PotentialConfig load_potential_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open potential file '" + path + "'");
    return read_potential_config(in);
}

// ---------------------------------------------------------------------------
// ineq
// ---------------------------------------------------------------------------

struct IneqOptions {
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::string dims = "4x4";
    std::string functions = "exp,square,positive";
    std::string suites = "jensen,scalar,gt,sliced,gibbs";
    std::string dump;
    std::string load;
    unsigned threads = 1;
};

struct SuiteSummary {
    std::string suite;
    std::size_t trials = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;

    json to_json() const {
        return json{{"suite", suite}, {"trials", trials}, {"min_gap", min_gap}, {"violations", violations}};
    }
};

inline std::vector<ScalarFunction> function_family(const std::string& names) {
    std::vector<ScalarFunction> out;
    for (const auto& name : split_words(names)) {
        if (name == "exp") {
            for (double t : {0.1, 1.0, 10.0}) out.push_back(ScalarFunction::exp_neg(t));
        } else if (name == "square") {
            out.push_back(ScalarFunction::square());
        } else if (name == "positive") {
            out.push_back(ScalarFunction::positive_part());
        } else if (name == "affine") {
            out.push_back(ScalarFunction::affine(1.5, -0.5));
        } else if (name == "power") {
            out.push_back(ScalarFunction::power_neg(1.0));
        } else {
            throw UsageError("unknown function '" + name + "' (exp, square, positive, affine, power)");
        }
    }
    if (out.empty()) throw UsageError("--functions is empty");
    return out;
}

namespace detail {

struct TrialOutcome {
    Gap gap;
    HermitianOperator h;
    BipartiteDims dims;
};

inline std::size_t draw(Rng& rng, std::size_t hi) { return 1 + static_cast<std::size_t>(rng() % hi); }

/// Operators with a positive spectrum when f is a negative power.
inline HermitianOperator shift_for(const ScalarFunction& f, HermitianOperator h) {
    if (f.kind() != ScalarFunction::Kind::PowerNeg) return h;
    const double lowest = eig_hermitian(h).eigenvalues.front();
    return h + HermitianOperator::identity(h.dim()) * (1.0 - lowest);
}

inline TrialOutcome run_trial(const std::string& suite, std::size_t index, const IneqOptions& opt,
                              const BipartiteDims& max_dims, const std::vector<ScalarFunction>& family,
                              const std::optional<std::pair<HermitianOperator, BipartiteDims>>& loaded) {
    Rng rng = trial_rng(opt.seed, index);
    const ScalarFunction& f = family[index % family.size()];
    BipartiteDims dims{draw(rng, max_dims.dim1), draw(rng, max_dims.dim2)};
    if (suite == "jensen") {
        HermitianOperator h;
        if (loaded) {
            h = loaded->first;
            dims = loaded->second;
        } else {
            h = random_hermitian(dims.total(), rng, 2.0);
        }
        h = shift_for(f, h);
        const auto rho = random_density(dims.dim1, draw(rng, dims.dim1), rng());
        return {jensen_partial_trace_gap(h, rho, dims, f), h, dims};
    }
    const std::size_t n = dims.total();
    if (suite == "scalar") {
        const auto h = shift_for(f, random_hermitian(n, rng, 2.0));
        const auto psi = random_unit_vector(n, rng);
        return {jensen_scalar_gap(h, psi, f), h, {n, 1}};
    }
    if (suite == "gt") {
        const auto a = random_hermitian(n, rng);
        const auto b = random_hermitian(n, rng);
        return {golden_thompson_gap(a, b), a + b, {n, 1}};
    }
    if (suite == "sliced") {
        const std::size_t m = std::max<std::size_t>(dims.dim1, 3);
        const auto t_op = periodic_laplacian(m);
        std::vector<HermitianOperator> w;
        for (std::size_t k = 0; k < m; ++k) w.push_back(random_psd(dims.dim2, rng));
        const double t = index % 2 == 0 ? 0.1 : 1.0;
        return {sliced_gt_gap(t_op, w, t), block_coupled(t_op, w), {m, dims.dim2}};
    }
    if (suite == "gibbs") {
        const auto h = random_hermitian(n, rng);
        const auto rho = random_density(n, draw(rng, n), rng());
        return {gibbs_gap(rho, h), h, {n, 1}};
    }
    throw UsageError("unknown suite '" + suite + "' (jensen, scalar, gt, sliced, gibbs)");
}

} // namespace detail

inline int cmd_ineq(const IneqOptions& opt, std::ostream& out) {
    if (opt.trials < 1) throw UsageError("--trials must be at least 1");
    const BipartiteDims max_dims = parse_dims(opt.dims);
    const auto family = function_family(opt.functions);
    std::optional<std::pair<HermitianOperator, BipartiteDims>> loaded;
    if (!opt.load.empty()) {
        std::ifstream in(opt.load);
        if (!in) throw UsageError("cannot open operator file '" + opt.load + "'");
        loaded = read_bipartite(in);
    }
    const auto suites = split_words(opt.suites);
    if (suites.empty()) throw UsageError("--suite is empty");

    bool violated = false;
    std::optional<detail::TrialOutcome> worst;
    for (const auto& suite : suites) {
        std::vector<std::optional<detail::TrialOutcome>> results(opt.trials);
        parallel_for_index(opt.trials, opt.threads, [&](std::size_t i) {
            results[i] = detail::run_trial(suite, i, opt, max_dims, family, loaded);
        });
        SuiteSummary summary{suite, opt.trials};
        for (const auto& r : results) {
            summary.min_gap = std::min(summary.min_gap, r->gap.value());
            if (!r->gap.holds()) ++summary.violations;
            if (suite == "jensen" && (!worst || r->gap.value() < worst->gap.value())) worst = r;
        }
        violated = violated || summary.violations > 0;
        out << summary.to_json().dump() << '\n';
    }
    if (!opt.dump.empty()) {
        if (!worst) throw UsageError("--dump needs the jensen suite");
        std::ofstream file(opt.dump);
        if (!file) throw UsageError("cannot open dump file '" + opt.dump + "'");
        write_bipartite(file, worst->h, worst->dims);
    }
    return violated ? 1 : 0;
}

// ---------------------------------------------------------------------------
// weyl
// ---------------------------------------------------------------------------

struct GridOptions {
    std::string box;
    std::string points;
};

struct WeylOptions {
    PotentialConfig potential;
    std::string lambdas;
    std::string times;
    GridOptions grid;
    std::string method = "truncated";
    unsigned threads = 1;
};

inline void write_fit_footer(std::ostream& out, const std::vector<std::pair<double, double>>& samples, double sign,
                             double target) {
    if (samples.size() < 3) return;
    const auto fit = exponent_fit(samples);
    out << "exponent," << format_number(sign * fit.slope) << ',' << format_number(target) << ','
        << format_number(fit.residual) << '\n';
}

inline GridSpec weyl_grid(const HomogeneousPotential& v, const GridOptions& grid, double level) {
    const auto box = parse_list(grid.box, "--box");
    const auto points = parse_list(grid.points, "--points");
    if (box.size() > 1 || points.size() > 1) throw UsageError("--box and --points take one value for weyl");
    const double l = box.empty() ? box_for_level(v, level) : box[0];
    if (!(l > 0.0)) throw UsageError("--box must be positive");
    const double default_h = v.dim == 1 ? 0.01 : 0.05;
    const std::size_t p =
        points.empty() ? static_cast<std::size_t>(std::llround(2.0 * l / default_h)) - 1 : static_cast<std::size_t>(points[0]);
    if (!points.empty() && (points[0] < 3 || points[0] != std::floor(points[0]))) throw UsageError("--points must be an integer >= 3");
    GridSpec spec = v.dim == 1 ? GridSpec::line(l, p) : GridSpec::plane(l, p, l, p);
    spec.validate();
    return spec;
}

inline int cmd_weyl(const WeylOptions& opt, std::ostream& out) {
    const auto v = opt.potential.homogeneous();
    const auto lambdas = parse_list(opt.lambdas, "--lambda");
    const auto times = parse_list(opt.times, "--t");
    if (!lambdas.empty() && !times.empty()) throw UsageError("give either --lambda or --t, not both");
    if (opt.method != "dense" && opt.method != "truncated") throw UsageError("--method must be dense or truncated");
    const double target = weyl_exponent(v.gamma, v.dim);

    if (!times.empty()) {
        for (double t : times)
            if (!(t > 0.0)) throw UsageError("--t values must be positive");
        const double t_min = *std::min_element(times.begin(), times.end());
        const auto op = build_hamiltonian(weyl_grid(v, opt.grid, 80.0 / t_min), v);
        const auto law = heat_weyl_law(v);
        const auto method = opt.method == "dense" ? HeatMethod::Dense : HeatMethod::Truncated;
        std::vector<double> values(times.size());
        parallel_for_index(times.size(), opt.threads, [&](std::size_t i) { values[i] = heat_trace(op, times[i], method).value; });
        out << "t,heat_trace,prediction,ratio\n";
        std::vector<std::pair<double, double>> samples;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double prediction = law.at(times[i]);
            out << format_number(times[i]) << ',' << format_number(values[i]) << ',' << format_number(prediction) << ',';
            if (std::isfinite(prediction) && prediction > 0.0) out << format_number(values[i] / prediction);
            out << '\n';
            if (values[i] > 0.0) samples.emplace_back(times[i], values[i]);
        }
        write_fit_footer(out, samples, -1.0, target);
        return 0;
    }

    out << "lambda,N_discrete,prediction,ratio\n";
    if (lambdas.empty()) return 0;
    const double lambda_max = *std::max_element(lambdas.begin(), lambdas.end());
    const auto op = build_hamiltonian(weyl_grid(v, opt.grid, 4.0 * std::max(lambda_max, 1.0)), v);
    const auto law = weyl_law(v);
    std::vector<std::size_t> counts(lambdas.size());
    parallel_for_index(lambdas.size(), opt.threads, [&](std::size_t i) { counts[i] = counting_function(op, lambdas[i]).count; });
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double prediction = law.at(lambdas[i]);
        out << format_number(lambdas[i]) << ',' << counts[i] << ',' << format_number(prediction) << ',';
        if (std::isfinite(prediction) && prediction > 0.0) out << format_number(static_cast<double>(counts[i]) / prediction);
        out << '\n';
        if (counts[i] > 0) samples.emplace_back(lambdas[i], static_cast<double>(counts[i]));
    }
    write_fit_footer(out, samples, 1.0, target);
    return 0;
}

// ---------------------------------------------------------------------------
// simon / zeta
// ---------------------------------------------------------------------------

struct ZetaOptions {
    PotentialConfig potential;
    double half_width = 0.0;
    double spacing = 0.01;
    double cut = 150.0;
};

/// Default y-box for the effective operators: potential >= 4 E_cut at the edge.
inline double zeta_box(const SeparatelyHomogeneous& v, double cut) {
    double fmin = std::numeric_limits<double>::infinity();
    for (double f : v.profile)
        if (f > 0.0) fmin = std::min(fmin, f);
    if (!std::isfinite(fmin)) fmin = 1.0;
    return std::pow(4.0 * cut / fmin, 1.0 / v.beta);
}

inline std::pair<ZetaTrace, ZetaTrace> run_zetas(const SeparatelyHomogeneous& v, const ZetaOptions& opt) {
    if (!(opt.cut > 0.0) || !(opt.spacing > 0.0)) throw UsageError("--cut and --spacing must be positive");
    const double l = opt.half_width > 0.0 ? opt.half_width : zeta_box(v, opt.cut);
    return effective_zetas(v, l, opt.spacing, opt.cut);
}

inline int cmd_zeta(const ZetaOptions& opt, std::ostream& out) {
    const auto v = opt.potential.separate();
    const auto [plus, minus] = run_zetas(v, opt);
    out << "omega,p,zeta,partial_sum,tail,eigenvalues,converged\n";
    const double p = partial_zeta_power(v);
    for (const auto& [omega, z] : {std::pair{1, plus}, std::pair{-1, minus}}) {
        out << omega << ',' << format_number(p) << ',' << format_number(z.value) << ',' << format_number(z.partial_sum)
            << ',' << format_number(z.tail) << ',' << z.eigenvalues_used << ',' << (z.converged ? "true" : "false") << '\n';
    }
    return 0;
}

struct SimonOptions {
    PotentialConfig potential;
    std::string lambdas;
    GridOptions grid;
    ZetaOptions zeta;
    unsigned threads = 1;
};

struct SimonRow {
    double lambda = 0.0;
    std::size_t count = 0;
    double prediction = 0.0;
};

struct SimonStudy {
    GridSpec grid;
    std::vector<SimonRow> rows;
    Prediction law;
    double zeta_plus = 0.0;
    double zeta_minus = 0.0;
};

inline GridSpec simon_grid(const SeparatelyHomogeneous& v, const GridOptions& grid, double lambda_max) {
    const auto rule = partial_counting_grid(v, lambda_max);
    GridSpec spec = rule.spec();
    const auto box = parse_list(grid.box, "--box");
    const auto points = parse_list(grid.points, "--points");
    if (box.size() > 2 || points.size() > 2) throw UsageError("--box and --points take at most two values (x,y)");
    for (std::size_t a = 0; a < box.size(); ++a) spec.axes[a].half_width = box[a];
    if (box.size() == 1) spec.axes[1].half_width = box[0];
    for (std::size_t a = 0; a < points.size(); ++a) spec.axes[a].points = static_cast<std::size_t>(points[a]);
    if (points.size() == 1) spec.axes[1].points = static_cast<std::size_t>(points[0]);
    spec.validate();
    return spec;
}

inline SimonStudy run_simon(const SeparatelyHomogeneous& v, const std::vector<double>& lambdas, const GridOptions& grid,
                            const ZetaOptions& zeta, unsigned threads) {
    require_partial_regime(v);
    for (double lambda : lambdas)
        if (!(lambda > 0.0)) throw UsageError("--lambda values must be positive");
    SimonStudy study;
    const auto [plus, minus] = run_zetas(v, zeta);
    study.zeta_plus = plus.value;
    study.zeta_minus = minus.value;
    const std::vector<double> z{plus.value, minus.value};
    study.law = partial_weyl_law(v, z);
    if (lambdas.empty()) return study;
    study.grid = simon_grid(v, grid, *std::max_element(lambdas.begin(), lambdas.end()));
    const auto op = build_hamiltonian(study.grid, v);
    study.rows.resize(lambdas.size());
    parallel_for_index(lambdas.size(), threads, [&](std::size_t i) {
        study.rows[i] = {lambdas[i], counting_function(op, lambdas[i]).count, study.law.at(lambdas[i])};
    });
    return study;
}

inline int cmd_simon(const SimonOptions& opt, std::ostream& out) {
    const auto v = opt.potential.separate();
    try {
        require_partial_regime(v);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const auto study = run_simon(v, parse_list(opt.lambdas, "--lambda"), opt.grid, opt.zeta, opt.threads);
    out << "lambda,N_discrete,prediction,ratio\n";
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : study.rows) {
        out << format_number(row.lambda) << ',' << row.count << ',' << format_number(row.prediction) << ',';
        if (std::isfinite(row.prediction) && row.prediction > 0.0)
            out << format_number(static_cast<double>(row.count) / row.prediction);
        out << '\n';
        if (row.count > 0) samples.emplace_back(row.lambda, static_cast<double>(row.count));
    }
    write_fit_footer(out, samples, 1.0, partial_exponent(v));
    return 0;
}

// ---------------------------------------------------------------------------
// constants / spectrum
// ---------------------------------------------------------------------------

struct ConstantsOptions {
    std::optional<double> gamma;
    int d = 1;
    std::optional<double> alpha;
    std::optional<double> beta;
    int m = 1;
    int n = 1;
};

inline int cmd_constants(const ConstantsOptions& opt, std::ostream& out) {
    if (!opt.gamma && !opt.alpha && !opt.beta) throw UsageError("constants needs --gamma or --alpha/--beta");
    json j;
    if (opt.gamma) {
        j["gamma"] = *opt.gamma;
        j["d"] = opt.d;
        j["C"] = round_significant(constant_C(*opt.gamma, opt.d));
        j["Cprime"] = round_significant(constant_Cprime(*opt.gamma, opt.d));
        j["exponent"] = round_significant(weyl_exponent(*opt.gamma, opt.d));
    }
    if (opt.alpha || opt.beta) {
        if (!opt.alpha || !opt.beta) throw UsageError("give both --alpha and --beta");
        const double a = *opt.alpha, b = *opt.beta;
        j["alpha"] = a;
        j["beta"] = b;
        j["m"] = opt.m;
        j["n"] = opt.n;
        j["divergence"] = to_string(divergence_classifier(opt.m, opt.n, a, b));
        const double dm = opt.m, dn = opt.n;
        j["partial_regime"] = dm / a > dn / b;
        if (dm / a > dn / b) {
            const double gamma_eff = 2.0 * a / (b + 2.0);
            j["partial_exponent"] = round_significant(dm * (a + b + 2.0) / (2.0 * a));
            j["zeta_power"] = round_significant(dm * (b + 2.0) / (2.0 * a));
            j["C_partial"] = round_significant(constant_C(gamma_eff, opt.m));
            j["Cprime_partial"] = round_significant(constant_Cprime(gamma_eff, opt.m));
        }
    }
    out << j.dump() << '\n';
    return 0;
}

struct SpectrumOptions {
    PotentialConfig potential;
    GridOptions grid;
    std::size_t count = 20;
    double level = 0.0;
};

inline int cmd_spectrum(const SpectrumOptions& opt, std::ostream& out) {
    GridSpec spec;
    PotentialSpec pot;
    if (opt.potential.variant == "separate") {
        const auto v = opt.potential.separate();
        const auto box = parse_list(opt.grid.box, "--box");
        const auto points = parse_list(opt.grid.points, "--points");
        if (box.empty() || points.empty()) throw UsageError("spectrum of a separately homogeneous potential needs --box and --points");
        spec = GridSpec::plane(box[0], static_cast<std::size_t>(points[0]), box.size() > 1 ? box[1] : box[0],
                               static_cast<std::size_t>(points.size() > 1 ? points[1] : points[0]));
        pot = v;
    } else {
        const auto v = opt.potential.homogeneous();
        spec = weyl_grid(v, opt.grid, opt.level > 0.0 ? 4.0 * opt.level : 400.0);
        pot = v;
    }
    const auto op = build_hamiltonian(spec, pot);
    const auto mu = opt.level > 0.0 ? eigenvalues_below(op.matrix(), opt.level) : lowest_eigenvalues(op.matrix(), opt.count);
    write_spectrum_csv(out, mu);
    return 0;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Partial-trace Jensen inequality and Weyl-law experiments"};
    app.require_subcommand(1);
    std::string out_path;
    unsigned threads = 1;
    app.add_option("--out", out_path, "Write results to FILE")->option_text("FILE");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
    app.fallthrough();

    std::string potential_file;
    PotentialConfig potential;
    std::string profile;
    auto add_potential_flags = [&](CLI::App* sub, bool separate) {
        sub->add_option("--potential", potential_file, "Potential configuration file")->check(CLI::ExistingFile);
        sub->add_option("--profile", profile, "Comma-separated profile values");
        if (separate) {
            sub->add_option("--alpha", potential.alpha, "Degree in x")->check(CLI::PositiveNumber);
            sub->add_option("--beta", potential.beta, "Degree in y")->check(CLI::PositiveNumber);
        } else {
            sub->add_option("--gamma", potential.gamma, "Degree of homogeneity")->check(CLI::PositiveNumber);
            sub->add_option("--d", potential.dim, "Dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
        }
    };
    auto resolve_potential = [&](const char* variant) {
        PotentialConfig c = potential_file.empty() ? potential : load_potential_config(potential_file);
        if (potential_file.empty()) c.variant = variant;
        if (!profile.empty()) c.profile = parse_list(profile, "--profile");
        return c;
    };

    IneqOptions ineq;
    auto* ineq_cmd = app.add_subcommand("ineq", "Random trials of the trace inequalities");
    ineq_cmd->add_option("--trials", ineq.trials, "Trials per suite")->check(CLI::PositiveNumber);
    ineq_cmd->add_option("--seed", ineq.seed, "Master seed");
    ineq_cmd->add_option("--dims", ineq.dims, "Largest bipartite dimensions MxN");
    ineq_cmd->add_option("--functions", ineq.functions, "exp,square,positive,affine,power");
    ineq_cmd->add_option("--suite", ineq.suites, "jensen,scalar,gt,sliced,gibbs");
    ineq_cmd->add_option("--dump", ineq.dump, "Write the jensen operator with the smallest gap");
    ineq_cmd->add_option("--load", ineq.load, "Use this bipartite operator in the jensen suite")->check(CLI::ExistingFile);

    WeylOptions weyl;
    auto* weyl_cmd = app.add_subcommand("weyl", "Eigenvalue counts and heat traces against the Weyl law");
    add_potential_flags(weyl_cmd, false);
    weyl_cmd->add_option("--lambda", weyl.lambdas, "Comma-separated energies");
    weyl_cmd->add_option("--t", weyl.times, "Comma-separated times (heat mode)");
    weyl_cmd->add_option("--box", weyl.grid.box, "Box half-width L");
    weyl_cmd->add_option("--points", weyl.grid.points, "Interior points per axis");
    weyl_cmd->add_option("--method", weyl.method, "dense|truncated")->check(CLI::IsMember({"dense", "truncated"}));

    SimonOptions simon;
    auto* simon_cmd = app.add_subcommand("simon", "Counting for |x|^alpha |y|^beta against the partial Weyl law");
    add_potential_flags(simon_cmd, true);
    simon_cmd->add_option("--lambda", simon.lambdas, "Comma-separated energies");
    simon_cmd->add_option("--box", simon.grid.box, "Box half-widths Lx[,Ly]");
    simon_cmd->add_option("--points", simon.grid.points, "Interior points Px[,Py]");
    simon_cmd->add_option("--zeta-cut", simon.zeta.cut, "Energy cutoff for the effective zeta sums")->check(CLI::PositiveNumber);

    ZetaOptions zeta;
    auto* zeta_cmd = app.add_subcommand("zeta", "Tr K_omega^{-p} of the effective operators");
    add_potential_flags(zeta_cmd, true);
    zeta_cmd->add_option("--box", zeta.half_width, "Half-width of the y grid")->check(CLI::PositiveNumber);
    zeta_cmd->add_option("--spacing", zeta.spacing, "Grid spacing")->check(CLI::PositiveNumber);
    zeta_cmd->add_option("--cut", zeta.cut, "Energy cutoff")->check(CLI::PositiveNumber);

    ConstantsOptions constants;
    auto* constants_cmd = app.add_subcommand("constants", "Weyl constants, exponents and divergence classes");
    constants_cmd->add_option("--gamma", constants.gamma, "Degree of homogeneity")->check(CLI::PositiveNumber);
    constants_cmd->add_option("--d", constants.d, "Dimension")->check(CLI::PositiveNumber);
    constants_cmd->add_option("--alpha", constants.alpha, "Degree in x")->check(CLI::PositiveNumber);
    constants_cmd->add_option("--beta", constants.beta, "Degree in y")->check(CLI::PositiveNumber);
    constants_cmd->add_option("--m", constants.m, "Dimension of x")->check(CLI::PositiveNumber);
    constants_cmd->add_option("--n", constants.n, "Dimension of y")->check(CLI::PositiveNumber);

    SpectrumOptions spectrum;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Lowest eigenvalues as CSV");
    add_potential_flags(spectrum_cmd, false);
    spectrum_cmd->add_option("--box", spectrum.grid.box, "Box half-width L[,Ly]");
    spectrum_cmd->add_option("--points", spectrum.grid.points, "Interior points per axis");
    spectrum_cmd->add_option("--count", spectrum.count, "Number of eigenvalues")->check(CLI::PositiveNumber);
    spectrum_cmd->add_option("--lambda", spectrum.level, "List every eigenvalue below this level instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Sink sink(out_path, out);
        if (*ineq_cmd) {
            ineq.threads = threads;
            return cmd_ineq(ineq, *sink);
        }
        if (*weyl_cmd) {
            weyl.potential = resolve_potential("homogeneous");
            weyl.threads = threads;
            return cmd_weyl(weyl, *sink);
        }
        if (*simon_cmd) {
            simon.potential = resolve_potential("separate");
            simon.threads = threads;
            return cmd_simon(simon, *sink);
        }
        if (*zeta_cmd) {
            zeta.potential = resolve_potential("separate");
            return cmd_zeta(zeta, *sink);
        }
        if (*constants_cmd) return cmd_constants(constants, *sink);
        if (*spectrum_cmd) {
            spectrum.potential = resolve_potential("homogeneous");
            return cmd_spectrum(spectrum, *sink);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const pj::DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const pj::DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"pjensen"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace pj::cli
