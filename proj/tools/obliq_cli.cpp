// Command-line surface for the oblique-quadrature measurement toolkit.
// Subcommands: canonicalize, equiv, metric, husimi, sample, verify.
// Reports are machine-parseable KEY=value lines followed by a short human
// summary.  Exit codes: 0 success, 1 check failure, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "obliq/fock.hpp"
#include "obliq/grid.hpp"
#include "obliq/husimi.hpp"
#include "obliq/json_io.hpp"
#include "obliq/sampler.hpp"
#include "obliq/sl2.hpp"
#include "obliq/states.hpp"

namespace {

using namespace obliq;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void emit(const std::string& key, double v) { std::cout << key << "=" << num(v) << "\n"; }
void emit(const std::string& key, const std::string& v) { std::cout << key << "=" << v << "\n"; }

std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("cannot parse number '" + item + "'");
        }
    }
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open JSON file '" + path + "'");
    json j;
    in >> j;
    return j;
}

double angle_in(double v, bool degrees) { return degrees ? v * pi / 180.0 : v; }

/// Metric specs: "a,b,c", "params:theta,phi,lambda", "matrix:m11,m12,m21,m22",
/// or a JSON file carrying one of those shapes.
MetricTensor parse_metric(const std::string& spec, bool degrees) {
    try {
        if (spec.rfind("params:", 0) == 0) {
            const auto v = split_numbers(spec.substr(7));
            if (v.size() != 3) throw UsageError("params: needs theta,phi,lambda");
            return metric_of(matrix_from_params(
                {angle_in(v[0], degrees), angle_in(v[1], degrees), v[2]}));
        }
        if (spec.rfind("matrix:", 0) == 0) {
            const auto v = split_numbers(spec.substr(7));
            if (v.size() != 4) throw UsageError("matrix: needs m11,m12,m21,m22");
            return metric_of(Sl2Matrix(v[0], v[1], v[2], v[3]));
        }
        if (spec.find(',') != std::string::npos) {
            const auto v = split_numbers(spec);
            if (v.size() != 3) throw UsageError("inline metric needs a,b,c");
            return {v[0], v[1], v[2]};
        }
        const json j = load_json_file(spec);
        if (j.contains("a")) return j.get<MetricTensor>();
        if (j.contains("m")) return metric_of(j.get<Sl2Matrix>());
        if (j.contains("theta")) return metric_of(matrix_from_params(j.get<CanonicalParams>()));
        throw UsageError("JSON metric file must carry a/b/c, m, or theta/phi/lambda");
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid metric: ") + e.what());
    }
}

Sl2Matrix parse_matrix(const std::string& spec) {
    try {
        if (spec.rfind("matrix:", 0) == 0 || spec.find(',') != std::string::npos) {
            const std::string body = spec.rfind("matrix:", 0) == 0 ? spec.substr(7) : spec;
            const auto v = split_numbers(body);
            if (v.size() != 4) throw UsageError("matrix needs m11,m12,m21,m22");
            return {v[0], v[1], v[2], v[3]};
        }
        if (!spec.empty() && spec[0] == '{') return json::parse(spec).get<Sl2Matrix>();
        return load_json_file(spec).get<Sl2Matrix>();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid matrix: ") + e.what());
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid matrix JSON: ") + e.what());
    }
}

struct StateSpec {
    std::optional<GaussianState> gaussian;
    std::optional<FockDensity> fock;
};

/// State specs: "vacuum", "coherent:x,p", "fock:n", or a JSON file with a
/// GaussianState, FockDensity, or FockVector.
StateSpec parse_state(const std::string& spec, int dim) {
    StateSpec out;
    if (spec == "vacuum") {
        out.gaussian = vacuum();
        return out;
    }
    if (spec.rfind("coherent:", 0) == 0) {
        const auto v = split_numbers(spec.substr(9));
        if (v.size() != 2) throw UsageError("coherent: needs x,p");
        out.gaussian = GaussianState(v[0], v[1], 0.5, 0.0, 0.5);
        return out;
    }
    if (spec.rfind("fock:", 0) == 0) {
        const auto v = split_numbers(spec.substr(5));
        if (v.size() != 1 || v[0] != std::floor(v[0]) || v[0] < 0)
            throw UsageError("fock: needs a non-negative integer");
        const int n = static_cast<int>(v[0]);
        if (n >= dim) throw UsageError("fock level exceeds --dim truncation");
        out.fock = fock_number_density(n, dim);
        return out;
    }
    const json j = load_json_file(spec);
    try {
        if (j.contains("mean")) {
            out.gaussian = j.get<GaussianState>();
        } else if (j.contains("matrix")) {
            out.fock = j.get<FockDensity>();
        } else if (j.contains("coeffs")) {
            out.fock = FockDensity::pure(j.get<FockVector>());
        } else {
            throw UsageError("state JSON must carry mean/cov, matrix, or coeffs");
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid state: ") + e.what());
    }
    return out;
}

FockDensity state_as_fock(const StateSpec& s, int dim) {
    if (s.fock) return *s.fock;
    return FockDensity::pure(gaussian_pure_to_fock(*s.gaussian, dim));
}

PhaseSpaceGrid parse_grid(const std::string& spec) {
    // xmin:xmax:nx,pmin:pmax:np
    const auto comma = spec.find(',');
    if (comma == std::string::npos) throw UsageError("grid spec needs two comma-separated axes");
    const auto parse_axis = [](const std::string& axis, double& lo, double& hi, int& n) {
        std::istringstream ss(axis);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
            throw UsageError("grid axis must be lo:hi:n");
        try {
            lo = std::stod(a);
            hi = std::stod(b);
            n = std::stoi(c);
        } catch (const std::exception&) {
            throw UsageError("cannot parse grid axis '" + axis + "'");
        }
    };
    double x0, x1, p0, p1;
    int nx, np;
    parse_axis(spec.substr(0, comma), x0, x1, nx);
    parse_axis(spec.substr(comma + 1), p0, p1, np);
    try {
        return {x0, x1, nx, p0, p1, np};
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid grid: ") + e.what());
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open output path '" + path + "'");
    return out;
}

// ---------------------------------------------------------------------------

int cmd_canonicalize(double theta_in, double phi_in, double lambda, bool degrees) {
    const double theta = angle_in(theta_in, degrees);
    const double phi = angle_in(phi_in, degrees);
    if (std::abs(phi) >= quarter_pi) throw UsageError("|phi| must be below pi/4");
    if (!(lambda > 0.0)) throw UsageError("lambda must be positive");

    const CanonicalParams p(theta, phi, lambda);
    const MetricTensor g = metric_of(matrix_from_params(p));
    const CanonicalParams c = canonical_orthogonal(g);
    const double root = std::sqrt(2.0 / std::cos(2.0 * phi));  // sqrt(2 sec 2phi)

    emit("theta0_rad", c.theta);
    emit("theta0_deg", c.theta * 180.0 / pi);
    emit("lambda0", c.lambda);
    emit("accuracy_x_input", lambda / root);
    emit("accuracy_p_input", 1.0 / (lambda * root));
    emit("accuracy_x_canonical", c.lambda / std::sqrt(2.0));
    emit("accuracy_p_canonical", 1.0 / (std::sqrt(2.0) * c.lambda));
    std::cout << "measuring x_(theta+phi), p_(theta-phi) to accuracies +-"
              << num(lambda / root) << ", +-" << num(1.0 / (lambda * root))
              << " carries the same information as measuring the orthogonal pair at angle "
              << num(c.theta * 180.0 / pi) << " deg to accuracies +-"
              << num(c.lambda / std::sqrt(2.0)) << ", +-"
              << num(1.0 / (std::sqrt(2.0) * c.lambda)) << "\n";
    return exit_ok;
}

int cmd_equiv(const std::string& m1_spec, const std::string& m2_spec, double tol) {
    const Sl2Matrix m1 = parse_matrix(m1_spec);
    const Sl2Matrix m2 = parse_matrix(m2_spec);
    const bool equiv = are_equivalent(m1, m2, tol);
    emit("equivalent", equiv ? "true" : "false");
    emit("metric_distance", metric_of(m1).max_abs_diff(metric_of(m2)));
    emit("pointer_rotation", is_rotation(pointer_transform(m1, m2), tol) ? "true" : "false");
    std::cout << (equiv ? "informationally equivalent\n" : "not equivalent\n");
    return equiv ? exit_ok : exit_check_failed;
}

int cmd_metric(const std::string& spec, bool degrees) {
    const MetricTensor g = parse_metric(spec, degrees);
    emit("a", g.a);
    emit("b", g.b);
    emit("c", g.c);
    emit("det", g.a * g.b - g.c * g.c);
    const SmoothingScales s = smoothing_scales(g);
    emit("theta0_rad", s.theta0);
    emit("lambda0", s.lambda0);
    emit("scale_x", s.scale_x);
    emit("scale_p", s.scale_p);
    std::cout << json(g).dump() << "\n";
    return exit_ok;
}

int cmd_husimi(const std::string& state_spec, const std::string& metric_spec,
               const std::string& grid_spec, const std::string& method, int dim,
               const std::string& out_path, bool degrees) {
    if (method != "closed" && method != "convolution" && method != "overlap")
        throw UsageError("method must be convolution, overlap, or closed");
    const MetricTensor g = parse_metric(metric_spec, degrees);
    const PhaseSpaceGrid layout = parse_grid(grid_spec);
    const StateSpec state = parse_state(state_spec, dim);

    std::ofstream csv = open_output(out_path);
    std::ofstream sidecar = open_output(out_path + ".json");

    std::optional<HusimiResult> result;
    if (method == "closed") {
        if (!state.gaussian)
            throw UsageError("method=closed needs a Gaussian state (vacuum, coherent, or JSON)");
        result = husimi_closed_grid(*state.gaussian, g, layout);
    } else if (method == "convolution") {
        const PhaseSpaceGrid w = state.gaussian ? wigner_gaussian(*state.gaussian, layout)
                                                : wigner_fock(*state.fock, layout);
        result = husimi_convolution(w, g);
    } else {
        const FockDensity rho = state_as_fock(state, dim);
        const Sl2Matrix m0 = matrix_from_params(canonical_orthogonal(g));
        result = husimi_overlap_grid(rho, m0, layout);
    }

    result->grid.write_csv(csv);
    sidecar << husimi_sidecar(*result).dump(2) << "\n";
    emit("method", to_string(result->method));
    emit("integral", result->integral());
    emit("min_value", result->min_value());
    emit("csv", out_path);
    emit("sidecar", out_path + ".json");
    if (std::abs(result->integral() - 1.0) > 1e-3)
        std::cout << "note: grid integral deviates from 1; widen or refine the grid\n";
    std::cout << "wrote " << layout.nx << "x" << layout.np << " " << to_string(result->method)
              << " distribution to " << out_path << "\n";
    return exit_ok;
}

int cmd_sample(const std::string& state_spec, const std::string& metric_spec, int n,
               std::uint64_t seed, int dim, const std::string& out_path, bool degrees) {
    const MetricTensor g = parse_metric(metric_spec, degrees);
    const StateSpec state = parse_state(state_spec, dim);
    std::ofstream csv = open_output(out_path);

    OutcomeBatch batch = state.gaussian
                             ? sample_gaussian(*state.gaussian, g, n, seed)
                             : sample_fock(*state.fock,
                                           matrix_from_params(canonical_orthogonal(g)), n, seed);
    batch.write_csv(csv);
    const SampleStats stats = outcome_stats(batch);
    emit("n", static_cast<double>(batch.count()));
    emit("seed", static_cast<double>(seed));
    emit("mean_x", stats.mean_x);
    emit("mean_p", stats.mean_p);
    emit("cov_xx", stats.cov_xx);
    emit("cov_xp", stats.cov_xp);
    emit("cov_pp", stats.cov_pp);
    emit("csv", out_path);
    std::cout << "wrote " << batch.count() << " outcomes to " << out_path << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

int cmd_verify() {
    std::vector<Check> checks;
    detail::GaussianRng rng(0xC0FFEE);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const auto random_params_draw = [&]() {
        return CanonicalParams(uniform(-pi, pi), uniform(-quarter_pi + 0.02, quarter_pi - 0.02),
                               std::exp(uniform(std::log(0.3), std::log(3.0))));
    };

    {  // parameterization round trip
        double worst = 0.0;
        for (int i = 0; i < 300; ++i) {
            const CanonicalParams p = random_params_draw();
            const CanonicalParams q = params_from_matrix(matrix_from_params(p));
            worst = std::max({worst, std::abs(p.theta - q.theta), std::abs(p.phi - q.phi),
                              std::abs(p.lambda - q.lambda)});
        }
        checks.push_back({"params_round_trip", worst < 1e-10, "max_err=" + num(worst)});
    }
    {  // canonical representative reconstructs the metric
        double worst = 0.0;
        for (int i = 0; i < 300; ++i) {
            const MetricTensor g = metric_of(matrix_from_params(random_params_draw()));
            const CanonicalParams c = canonical_orthogonal(g);
            worst = std::max(worst, metric_of(matrix_from_params(c)).max_abs_diff(g));
        }
        checks.push_back({"canonical_reconstruction", worst < 1e-10, "max_err=" + num(worst)});
    }
    {  // equivalence matches the pointer-rotation criterion
        bool ok = true;
        for (int i = 0; i < 200; ++i) {
            const Sl2Matrix m = matrix_from_params(random_params_draw());
            Sl2Matrix m2 = Sl2Matrix::rotation(uniform(-pi, pi)) * m;
            const bool tampered = (i % 2 == 1);
            if (tampered) m2 = rebalance(m2, 1.12);
            const bool equiv = are_equivalent(m, m2, 1e-9);
            ok = ok && (equiv == is_rotation(pointer_transform(m, m2), 1e-9)) &&
                 (equiv == !tampered);
        }
        checks.push_back({"equivalence_vs_rotation", ok, "pairs=200"});
    }
    {  // reference oblique measurement at phi = 40 deg
        const double phi = 40.0 * pi / 180.0;
        const MetricTensor g = metric_of(matrix_from_params({0.0, phi, 1.0}));
        const CanonicalParams c = canonical_orthogonal(g);
        const double acc_in = 1.0 / std::sqrt(2.0 / std::cos(2.0 * phi));
        const double acc_x = c.lambda / std::sqrt(2.0);
        const double acc_p = 1.0 / (std::sqrt(2.0) * c.lambda);
        const MetricTensor gc = metric_of(matrix_from_params(c));
        const bool pass = std::abs(acc_in - 0.29) < 5e-3 && std::abs(acc_x - 2.39) < 5e-3 &&
                          std::abs(acc_p - 0.21) < 5e-3 &&
                          metric_of(matrix_from_params({-quarter_pi, 0.0, c.lambda}))
                                  .max_abs_diff(gc) < 1e-10;
        checks.push_back({"oblique40_reference", pass,
                          "acc=" + num(acc_in) + "," + num(acc_x) + "," + num(acc_p)});
    }
    {  // closed form vs grid convolution
        const MetricTensor g = metric_of(matrix_from_params({0.3, 20.0 * pi / 180.0, 1.2}));
        const PhaseSpaceGrid layout(-8.0, 8.0, 161, -8.0, 8.0, 161);
        double worst = 0.0;
        for (const GaussianState& s :
             {vacuum(), GaussianState(0.6, -0.4, 0.8, 0.15, 0.4)}) {
            const HusimiResult conv = husimi_convolution(wigner_gaussian(s, layout), g);
            const HusimiResult closed = husimi_closed_grid(s, g, layout);
            for (size_t i = 0; i < conv.grid.values.size(); ++i)
                worst = std::max(worst,
                                 std::abs(conv.grid.values[i] - closed.grid.values[i]));
        }
        checks.push_back({"convolution_vs_closed", worst < 1e-6, "sup_err=" + num(worst)});
    }
    {  // overlap vs closed form at finite truncation
        const MetricTensor g = metric_of(matrix_from_params({-0.4, 15.0 * pi / 180.0, 0.9}));
        const GaussianState s = vacuum();
        const Sl2Matrix m0 = matrix_from_params(canonical_orthogonal(g));
        const FockDensity rho = FockDensity::pure(gaussian_pure_to_fock(s, 96));
        std::vector<std::pair<double, double>> points;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j) points.emplace_back(1.1 * i, 1.1 * j);
        const std::vector<double> q = husimi_overlap(rho, m0, points);
        const GaussianState closed = husimi_gaussian_closed(s, g);
        double worst = 0.0;
        for (size_t i = 0; i < points.size(); ++i)
            worst = std::max(worst,
                             std::abs(q[i] - closed.density(points[i].first, points[i].second)));
        checks.push_back({"overlap_vs_closed", worst < 1e-3, "max_err=" + num(worst)});
    }
    {  // single photon: positive and normalised despite Wigner negativity
        const PhaseSpaceGrid layout(-8.0, 8.0, 161, -8.0, 8.0, 161);
        const HusimiResult q =
            husimi_convolution(wigner_fock(fock_number_density(1, 4), layout),
                               MetricTensor::identity());
        const bool pass = q.min_value() >= -1e-9 && std::abs(q.integral() - 1.0) < 1e-3;
        checks.push_back({"single_photon_positivity", pass,
                          "min=" + num(q.min_value()) + " integral=" + num(q.integral())});
    }
    {  // sampler determinism and covariance
        const OutcomeBatch b1 = sample_gaussian(vacuum(), MetricTensor::identity(), 20000, 99);
        const OutcomeBatch b2 = sample_gaussian(vacuum(), MetricTensor::identity(), 20000, 99);
        bool identical = b1.samples == b2.samples;
        const SampleStats st = outcome_stats(b1);
        const double se = 5.0 * std::sqrt(2.0 / 20000.0);
        const bool pass = identical && std::abs(st.cov_xx - 1.0) < se &&
                          std::abs(st.cov_pp - 1.0) < se && std::abs(st.cov_xp) < se;
        checks.push_back({"sampler_determinism_and_law", pass,
                          "cov=" + num(st.cov_xx) + "," + num(st.cov_xp) + "," + num(st.cov_pp)});
    }

    bool all = true;
    for (const Check& c : checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " " << c.detail << "\n";
    }
    emit("checks", static_cast<double>(checks.size()));
    emit("verify", all ? "pass" : "fail");
    return all ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oblique-quadrature measurement toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // allow --degrees after the subcommand name
    bool degrees = false;
    app.add_flag("--degrees", degrees, "interpret input angles as degrees");

    auto* canon = app.add_subcommand("canonicalize",
                                     "orthogonal representative and accuracy figures");
    double theta = 0.0, phi = 0.0, lambda = 1.0;
    canon->add_option("theta", theta, "rotation angle")->required();
    canon->add_option("phi", phi, "obliquity angle")->required();
    canon->add_option("lambda", lambda, "resolution (default 1)");

    auto* equiv = app.add_subcommand("equiv", "test informational equivalence of two matrices");
    std::string m1_spec, m2_spec;
    double tol = 1e-9;
    equiv->add_option("matrix1", m1_spec, "first matrix (JSON file, inline JSON, or m11,m12,m21,m22)")
        ->required();
    equiv->add_option("matrix2", m2_spec, "second matrix")->required();
    equiv->add_option("--tol", tol, "metric comparison tolerance");

    auto* metric = app.add_subcommand("metric", "metric tensor and smoothing scales");
    std::string metric_spec;
    metric->add_option("spec", metric_spec, "params:t,f,l | matrix:... | a,b,c | file.json")
        ->required();

    auto* husimi = app.add_subcommand("husimi", "outcome distribution on a grid");
    std::string state_spec = "vacuum", h_metric = "1,1,0", grid_spec = "-8:8:161,-8:8:161";
    std::string method = "convolution", out_path = "husimi.csv";
    int dim = 64;
    husimi->add_option("--state", state_spec, "vacuum | coherent:x,p | fock:n | file.json");
    husimi->add_option("--metric", h_metric, "measurement metric spec")->required();
    husimi->add_option("--grid", grid_spec, "xmin:xmax:nx,pmin:pmax:np");
    husimi->add_option("--method", method, "convolution | overlap | closed");
    husimi->add_option("--dim", dim, "Fock truncation for overlap/fock states");
    husimi->add_option("--out", out_path, "output CSV path (sidecar: <out>.json)");

    auto* sample = app.add_subcommand("sample", "draw synthetic measurement outcomes");
    std::string s_state = "vacuum", s_metric = "1,1,0", s_out = "samples.csv";
    int n = 1000, s_dim = 64;
    std::uint64_t seed = 1;
    sample->add_option("--state", s_state, "vacuum | coherent:x,p | fock:n | file.json");
    sample->add_option("--metric", s_metric, "measurement metric spec")->required();
    sample->add_option("--n", n, "number of outcomes");
    sample->add_option("--seed", seed, "RNG seed");
    sample->add_option("--dim", s_dim, "Fock truncation for fock states");
    sample->add_option("--out", s_out, "output CSV path");

    app.add_subcommand("verify", "run the cross-oracle self checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (app.got_subcommand("canonicalize")) return cmd_canonicalize(theta, phi, lambda, degrees);
        if (app.got_subcommand("equiv")) return cmd_equiv(m1_spec, m2_spec, tol);
        if (app.got_subcommand("metric")) return cmd_metric(metric_spec, degrees);
        if (app.got_subcommand("husimi"))
            return cmd_husimi(state_spec, h_metric, grid_spec, method, dim, out_path, degrees);
        if (app.got_subcommand("sample"))
            return cmd_sample(s_state, s_metric, n, seed, s_dim, s_out, degrees);
        if (app.got_subcommand("verify")) return cmd_verify();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_check_failed;
    }
    return exit_usage;
}
