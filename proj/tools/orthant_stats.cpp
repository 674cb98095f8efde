// Command-line front end for geodesics, log maps, Frechet means and the
// Monte-Carlo CLT harness on orthant spaces.  All numeric output is JSON
// with 17-significant-digit reals; identical inputs and seed give
// byte-identical output.  Exit codes: 0 success, 1 error, 2 validation or
// verification failure, 64 usage error.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "orthant/clt.hpp"
#include "orthant/io.hpp"
#include "orthant/oracle.hpp"

using namespace orthant;

namespace {

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("ORTHANT_STATS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void emit(const JsonWriter& w, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << w.str() << "\n";
    } else {
        std::ofstream f(out_path);
        f << w.str() << "\n";
    }
}

void write_certificate(JsonWriter& w, const MeanCertificate& cert) {
    w.begin_object();
    w.key("pass").value(cert.pass);
    w.key("fixed_point_residual").value(cert.fixed_point_residual);
    w.key("tol").value(cert.tol);
    w.key("sphere_samples").value(cert.sphere_samples);
    w.key("taus").begin_array();
    for (auto& rep : cert.taus) {
        w.begin_object();
        w.key("tau");
        write_axis_array(w, rep.tau);
        w.key("max_g").value(rep.max_g);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

void write_theta(JsonWriter& w, const ThetaEstimate& est) {
    w.begin_object();
    w.key("tau");
    write_axis_array(w, est.tau);
    w.key("tol").value(est.tol);
    w.key("grid_size").value(static_cast<long long>(est.dirs.size()));
    w.key("flagged").value(est.flagged);
    w.key("convex_at_resolution").value(est.convex_at_resolution);
    if (!est.dirs.empty() && est.dirs.front().size() == 2 && est.flagged > 0) {
        w.key("theta_min").value(est.theta_min);
        w.key("theta_max").value(est.theta_max);
    }
    w.key("flags").begin_array();
    for (bool b : est.flags) w.value(b);
    w.end_array();
    w.key("values").begin_array();
    for (double v : est.values) w.value(v);
    w.end_array();
    w.end_object();
}

const char* schema_validate = R"({"type":"object","properties":{"valid":{"type":"boolean"},"ambient_dim":{"type":"integer"},"num_strata":{"type":"integer"},"max_dim":{"type":"integer"},"error":{"type":"string"},"offending_orthant":{"type":"array","items":{"type":"integer"}}},"required":["valid"]})";
const char* schema_geodesic = R"({"type":"object","properties":{"support":{"type":"object","properties":{"A":{"type":"array","items":{"type":"array","items":{"type":"integer"}}},"B":{"type":"array","items":{"type":"array","items":{"type":"integer"}}}}},"length":{"type":"number"},"breakpoints":{"type":"array","items":{"type":"object","properties":{"t":{"type":"number"},"coords":{"type":"object"}}}},"point":{"type":"object"},"oracle_length":{"type":"number"}},"required":["support","length"]})";
const char* schema_logmap = R"({"type":"object","properties":{"phi":{"type":"array","items":{"type":"number"}},"log":{"type":"array","items":{"type":"number"}},"in_d":{"type":"boolean"},"psi":{"type":"array","items":{"type":"number"}},"psi_tau":{"type":"array","items":{"type":"number"}},"singular":{"type":"boolean"},"matrix":{"type":"array","items":{"type":"array","items":{"type":"number"}}},"directional_matrix":{"type":"array","items":{"type":"array","items":{"type":"number"}}}},"required":["phi","log"]})";
const char* schema_frechet_mean = R"({"type":"object","properties":{"mean":{"type":"object","properties":{"coords":{"type":"object"}}},"frechet_value":{"type":"number"},"iterations":{"type":"integer"},"certificate":{"type":"object"},"theta":{"type":"object"}},"required":["mean","frechet_value","certificate"]})";
const char* schema_verify_mean = R"({"type":"object","properties":{"certificate":{"type":"object","properties":{"pass":{"type":"boolean"},"fixed_point_residual":{"type":"number"},"taus":{"type":"array"}}}},"required":["certificate"]})";
const char* schema_theta = R"({"type":"object","properties":{"tau":{"type":"array","items":{"type":"integer"}},"tol":{"type":"number"},"grid_size":{"type":"integer"},"flagged":{"type":"integer"},"convex_at_resolution":{"type":"boolean"},"theta_min":{"type":"number"},"theta_max":{"type":"number"},"flags":{"type":"array","items":{"type":"boolean"}},"values":{"type":"array","items":{"type":"number"}}},"required":["tau","flagged"]})";
const char* schema_clt_sim = R"({"type":"object","properties":{"x_star":{"type":"object"},"n":{"type":"integer"},"reps":{"type":"integer"},"seed":{"type":"integer"},"frequencies":{"type":"array","items":{"type":"object","properties":{"stratum":{"type":"array","items":{"type":"integer"}},"count":{"type":"integer"}}}},"inside":{"type":"integer"},"boundary":{"type":"integer"},"violations":{"type":"integer"},"prediction":{"type":"object"}},"required":["n","reps","frequencies","violations"]})";

AxisSet parse_axis_list(const std::string& s) {
    AxisSet out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.insert(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthant-stats: geodesics, log maps, Frechet means and "
                 "sample-mean limit laws on orthant spaces"};
    app.require_subcommand(1);

    double tol = -1;  // <0: per-command defaults
    int threads = 0;
    app.add_option("--tol", tol,
                   "override the default verification tolerance (1e-8)");
    app.add_option("--threads", threads,
                   "worker threads (default: ORTHANT_STATS_THREADS or all cores)");

    std::string space_path, from_path, to_path, base_path, point_path;
    std::string dir_path, measure_path, at_path, out_path, tau_str;
    bool schema = false, oracle = false, derivative = false;
    double t_param = -1;
    int n_param = 200, reps = 2000, resolution = 256, samples = 64, max_iter = 200;
    std::uint64_t seed = 0;
    bool do_predict = false;

    auto* c_validate = app.add_subcommand("validate", "check a space file");
    c_validate->add_option("--space", space_path);
    c_validate->add_flag("--schema", schema, "print the output JSON schema");

    auto* c_geo = app.add_subcommand("geodesic", "geodesic between two points");
    c_geo->add_option("--space", space_path);
    c_geo->add_option("--from", from_path);
    c_geo->add_option("--to", to_path);
    c_geo->add_option("--t", t_param, "evaluate the geodesic at t in [0,1]");
    c_geo->add_flag("--oracle", oracle, "also run the brute-force oracle");
    c_geo->add_flag("--schema", schema);

    auto* c_log = app.add_subcommand("logmap", "translated log map and limits");
    c_log->add_option("--space", space_path);
    c_log->add_option("--base", base_path);
    c_log->add_option("--point", point_path);
    c_log->add_option("--direction", dir_path, "tangent direction file");
    c_log->add_flag("--derivative", derivative, "emit derivative matrices");
    c_log->add_flag("--schema", schema);

    auto* c_mean = app.add_subcommand("frechet-mean", "compute the Frechet mean");
    c_mean->add_option("--space", space_path);
    c_mean->add_option("--measure", measure_path);
    c_mean->add_option("--verify-only", at_path, "verify a candidate instead");
    c_mean->add_option("--theta", tau_str, "also report Theta for these axes");
    c_mean->add_option("--seed", seed);
    c_mean->add_option("--samples", samples, "sphere samples per dimension");
    c_mean->add_option("--max-iter", max_iter);
    c_mean->add_flag("--schema", schema);

    auto* c_verify = app.add_subcommand("verify-mean", "verify a candidate mean");
    c_verify->add_option("--space", space_path);
    c_verify->add_option("--measure", measure_path);
    c_verify->add_option("--at", at_path);
    c_verify->add_option("--samples", samples);
    c_verify->add_flag("--schema", schema);

    auto* c_theta = app.add_subcommand("theta", "equality set of a direction sphere");
    c_theta->add_option("--space", space_path);
    c_theta->add_option("--measure", measure_path);
    c_theta->add_option("--at", at_path);
    c_theta->add_option("--tau", tau_str, "comma-separated axis list");
    c_theta->add_option("--resolution", resolution);
    c_theta->add_flag("--schema", schema);

    auto* c_clt = app.add_subcommand("clt-sim", "Monte-Carlo sample means");
    c_clt->add_option("--space", space_path);
    c_clt->add_option("--measure", measure_path);
    c_clt->add_option("--n", n_param);
    c_clt->add_option("--reps", reps);
    c_clt->add_option("--seed", seed);
    c_clt->add_flag("--predict", do_predict, "emit the Gaussian predictions");
    c_clt->add_option("--out", out_path, "write draws CSV here");
    c_clt->add_flag("--schema", schema);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 64;
    }

    const double vtol = tol > 0 ? tol : 1e-8;

    try {
        if (schema) {
            if (c_validate->parsed()) std::cout << schema_validate << "\n";
            if (c_geo->parsed()) std::cout << schema_geodesic << "\n";
            if (c_log->parsed()) std::cout << schema_logmap << "\n";
            if (c_mean->parsed()) std::cout << schema_frechet_mean << "\n";
            if (c_verify->parsed()) std::cout << schema_verify_mean << "\n";
            if (c_theta->parsed()) std::cout << schema_theta << "\n";
            if (c_clt->parsed()) std::cout << schema_clt_sim << "\n";
            return 0;
        }

        if (c_validate->parsed()) {
            JsonWriter w;
            try {
                const OrthantSpace space = load_space(space_path);
                w.begin_object();
                w.key("valid").value(true);
                w.key("ambient_dim").value(space.ambient_dim());
                w.key("num_strata").value(
                    static_cast<long long>(space.strata().size()));
                w.key("max_dim").value(space.max_dim());
                w.end_object();
                emit(w, "");
                return 0;
            } catch (const FlagViolation& e) {
                w.begin_object();
                w.key("valid").value(false);
                w.key("error").value("flag_violation");
                w.key("offending_orthant");
                write_axis_array(w, AxisSet(e.offending_mask));
                w.end_object();
                emit(w, "");
                return 2;
            } catch (const AxisOutOfRange& e) {
                w.begin_object();
                w.key("valid").value(false);
                w.key("error").value(std::string("axis_out_of_range: ") + e.what());
                w.end_object();
                emit(w, "");
                return 2;
            }
        }

        if (c_geo->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const Point a = load_point(space, from_path);
            const Point b = load_point(space, to_path);
            const Geodesic g = make_geodesic(space, a, b);
            JsonWriter w;
            w.begin_object();
            w.key("support").begin_object();
            w.key("A").begin_array();
            for (auto& s : g.support.A) write_axis_array(w, s);
            w.end_array();
            w.key("B").begin_array();
            for (auto& s : g.support.B) write_axis_array(w, s);
            w.end_array();
            w.end_object();
            w.key("length").value(g.length);
            w.key("breakpoints").begin_array();
            for (auto& [ti, pt] : g.breakpoints) {
                w.begin_object();
                w.key("t").value(ti);
                w.key("coords");
                write_point_coords(w, pt);
                w.end_object();
            }
            w.end_array();
            if (t_param >= 0) {
                w.key("point");
                write_point_coords(w, eval_geodesic(space, a, b, t_param));
            }
            if (oracle) {
                const int len = std::min(a.support().size(), b.support().size()) + 1;
                w.key("oracle_length")
                    .value(brute_force_distance(space, a, b, std::max(len, 2)));
            }
            w.end_object();
            emit(w, "");
            return 0;
        }

        if (c_log->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const Point base = load_point(space, base_path);
            const Point x = load_point(space, point_path);
            JsonWriter w;
            w.begin_object();
            w.key("phi");
            write_vector(w, translated_log(space, base, x));
            w.key("log");
            write_vector(w, log_map(space, base, x));
            w.key("in_d").value(in_D(space, base, x));
            if (!dir_path.empty()) {
                const TangentVector dir = load_direction(space, base, dir_path);
                w.key("psi");
                write_vector(w, directional_limit(space, base, dir, x));
                w.key("psi_tau");
                write_vector(w, psi_tau(space, base, dir, x));
                w.key("singular").value(is_singular(space, base, dir.perp(), x));
                if (derivative) {
                    w.key("directional_matrix");
                    write_matrix(w, directional_derivative_matrix(space, base, x,
                                                                  dir.perp()));
                }
            }
            if (derivative) {
                w.key("matrix");
                write_matrix(w, derivative_matrix(space, base, x));
            }
            w.end_object();
            emit(w, "");
            return 0;
        }

        if (c_mean->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const DiscreteMeasure mu = load_measure(space, measure_path);
            JsonWriter w;
            if (!at_path.empty()) {
                const Point cand = load_point(space, at_path);
                const MeanCertificate cert =
                    verify_mean(space, mu, cand, samples, vtol);
                w.begin_object();
                w.key("certificate");
                write_certificate(w, cert);
                w.end_object();
                emit(w, "");
                return cert.pass ? 0 : 2;
            }
            FrechetMeanOptions opts;
            opts.seed = seed;
            opts.tol = vtol;
            opts.sphere_samples = samples;
            opts.max_iter = max_iter;
            const FrechetMeanResult res = frechet_mean(space, mu, opts);
            w.begin_object();
            w.key("mean").begin_object();
            w.key("coords");
            write_point_coords(w, res.mean);
            w.end_object();
            w.key("frechet_value").value(frechet_value(space, mu, res.mean));
            w.key("iterations").value(res.outer_iterations);
            w.key("certificate");
            write_certificate(w, res.certificate);
            if (!tau_str.empty()) {
                w.key("theta");
                write_theta(w, theta_set(space, mu, res.mean,
                                         res.mean.support() | parse_axis_list(tau_str),
                                         resolution));
            }
            w.end_object();
            emit(w, "");
            return 0;
        }

        if (c_verify->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const DiscreteMeasure mu = load_measure(space, measure_path);
            const Point cand = load_point(space, at_path);
            const MeanCertificate cert = verify_mean(space, mu, cand, samples, vtol);
            JsonWriter w;
            w.begin_object();
            w.key("certificate");
            write_certificate(w, cert);
            w.end_object();
            emit(w, "");
            return cert.pass ? 0 : 2;
        }

        if (c_theta->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const DiscreteMeasure mu = load_measure(space, measure_path);
            const Point cand = load_point(space, at_path);
            const ThetaEstimate est = theta_set(
                space, mu, cand, cand.support() | parse_axis_list(tau_str),
                resolution);
            JsonWriter w;
            write_theta(w, est);
            emit(w, "");
            return 0;
        }

        if (c_clt->parsed()) {
            const OrthantSpace space = load_space(space_path);
            const DiscreteMeasure mu = load_measure(space, measure_path);
            FrechetMeanOptions opts;
            opts.tol = vtol;
            const EmpiricalCLT emp = monte_carlo(space, mu, n_param, reps, seed,
                                                 resolve_threads(threads), opts);
            const CltPrediction pred = predict(space, mu, emp.x_star);
            const SupportFrequencies freq = support_frequencies(space, emp, pred);

            if (!out_path.empty()) {
                std::ofstream csv(out_path);
                csv << "rep,stratum";
                for (int a = 0; a < space.ambient_dim(); ++a) csv << ",z" << a;
                csv << "\n";
                for (int r = 0; r < emp.reps; ++r) {
                    csv << r << ",";
                    const auto axes = emp.draws[r].stratum.axes();
                    for (size_t i = 0; i < axes.size(); ++i)
                        csv << (i ? " " : "") << axes[i];
                    for (int a = 0; a < space.ambient_dim(); ++a)
                        csv << "," << JsonWriter::real(emp.draws[r].scaled[a]);
                    csv << "\n";
                }
            }

            JsonWriter w;
            w.begin_object();
            w.key("x_star");
            write_point_coords(w, emp.x_star);
            w.key("n").value(n_param);
            w.key("reps").value(reps);
            w.key("seed").value(static_cast<long long>(seed));
            w.key("frequencies").begin_array();
            for (auto& [mask, count] : freq.stratum_counts) {
                w.begin_object();
                w.key("stratum");
                write_axis_array(w, AxisSet(mask));
                w.key("count").value(count);
                w.end_object();
            }
            w.end_array();
            w.key("inside").value(freq.inside);
            w.key("boundary").value(freq.boundary);
            w.key("violations").value(freq.violations);
            if (do_predict) {
                w.key("prediction").begin_object();
                w.key("sigma");
                write_axis_array(w, pred.sigma);
                w.key("pieces").begin_array();
                for (auto& piece : pred.pieces) {
                    w.begin_object();
                    w.key("tau");
                    write_axis_array(w, piece.tau);
                    w.key("theta_full").value(piece.theta_full);
                    w.key("a_matrix");
                    write_matrix(w, piece.a);
                    w.key("v_matrix");
                    write_matrix(w, piece.v);
                    w.key("covariance");
                    write_matrix(w, piece.covariance);
                    w.end_object();
                }
                w.end_array();
                w.end_object();
            }
            w.end_object();
            emit(w, "");
            return freq.violations == 0 ? 0 : 2;
        }
    } catch (const PreconditionFailed& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
