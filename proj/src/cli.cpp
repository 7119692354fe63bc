#include "mim/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mim/dynamics.hpp"
#include "mim/io.hpp"
#include "mim/modes.hpp"
#include "mim/spectrum.hpp"

namespace mim::cli {

namespace {

using std::numbers::pi;
using io::Table;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Cavity {
    std::optional<double> xi_L, delta, alpha, chi0;
    std::optional<double> beta, q0;

    [[nodiscard]] CavityConfig config(std::optional<double> width = std::nullopt) const {
        if (!xi_L) throw UsageError("--xi-l is required");
        if (alpha.has_value() == chi0.has_value()) throw UsageError("give exactly one of --alpha and --chi0");
        const auto d = width ? width : delta;
        if (!d) throw UsageError("--delta is required");
        return alpha ? make_config_alpha(*xi_L, *d, *alpha) : make_config(*xi_L, *d, *chi0);
    }

    [[nodiscard]] double refractive() const {
        if (alpha.has_value() == chi0.has_value()) throw UsageError("give exactly one of --alpha and --chi0");
        return alpha ? *alpha : std::sqrt(1.0 + kFourPi * *chi0);
    }

    [[nodiscard]] MembranePosition position(const CavityConfig& cfg) const {
        if (beta.has_value() == q0.has_value()) throw UsageError("give exactly one of --beta and --q0");
        return beta ? position_from_beta(cfg, *beta) : position_from_q0(cfg, *q0);
    }
};

struct Output {
    std::string path;
    std::string format = "csv";
    int digits = io::kDefaultDigits;
};

void add_cavity(CLI::App* sub, Cavity& c, bool position) {
    sub->add_option("--xi-l", c.xi_L, "cavity length (units of lambda0)");
    sub->add_option("--delta", c.delta, "slab width");
    auto* a = sub->add_option("--alpha", c.alpha, "refractive factor sqrt(1 + 4 pi chi0)");
    auto* x = sub->add_option("--chi0", c.chi0, "slab susceptibility");
    a->excludes(x);
    if (position) {
        auto* b = sub->add_option("--beta", c.beta, "left slab edge / xi_L");
        auto* q = sub->add_option("--q0", c.q0, "slab midpoint");
        b->excludes(q);
    }
}

void add_output(CLI::App* sub, Output& o) {
    sub->add_option("-o,--output", o.path, "output file (default: stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--digits", o.digits, "significant digits")->check(CLI::Range(1, 17));
}

std::string render(const Table& t, const Output& o) {
    std::ostringstream s;
    if (o.format == "json")
        io::emit_json(io::to_json(t, o.digits), s);
    else
        io::emit_csv(t, s, o.digits);
    return s.str();
}

void emit(const Table& t, const Output& o, const std::string& path, std::ostream& out) {
    io::write_text(path, render(t, o), out);
}

// --- JSON config ---------------------------------------------------------------

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw UsageError("unsupported config value " + v.dump());
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

// Removes --config from args and appends every file entry the command line
// does not already set, so flags override the file.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::set<std::string>& commands) {
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (!path) return args;
    std::ifstream f(*path);
    if (!f) throw io::IoError("cannot read config " + *path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("bad config file: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");

    const bool has_command = args.size() > 1 && commands.count(args[1]);
    if (!has_command) {
        if (!doc.contains("command")) throw UsageError("no subcommand given");
        args.insert(args.begin() + 1, doc["command"].get<std::string>());
    } else if (doc.contains("command") && doc["command"] != args[1]) {
        throw UsageError("config is for '" + doc["command"].get<std::string>() + "'");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") continue;
        const std::string flag = "--" + key;
        if (mentions(args, flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            if (value.empty()) continue;
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + json_scalar(v);
            args.push_back(flag);
            args.push_back(joined);
        } else if (!value.is_null()) {
            args.push_back(flag);
            args.push_back(json_scalar(value));
        }
    }
    return args;
}

nlohmann::ordered_json config_of(const CLI::App* sub) {
    nlohmann::ordered_json doc;
    doc["command"] = sub->get_name();
    auto parse_value = [](const std::string& s) -> nlohmann::ordered_json {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (!s.empty() && end == s.c_str() + s.size()) {
            if (std::floor(v) == v && std::abs(v) < 1e15 && s.find_first_of(".eE") == std::string::npos)
                return static_cast<long long>(v);
            return v;
        }
        return s;
    };
    for (const CLI::Option* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty()) continue;
        const std::string& name = names.front();
        if (name == "help" || name == "write-config") continue;
        if (opt->get_expected_max() == 0) {
            doc[name] = opt->count() > 0;
            continue;
        }
        std::vector<std::string> items;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) {
                std::stringstream ss(r);
                for (std::string piece; std::getline(ss, piece, ',');) items.push_back(piece);
            }
        } else if (!opt->get_default_str().empty()) {
            items.push_back(opt->get_default_str());
        } else {
            continue;
        }
        if (opt->get_items_expected_max() > 1) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& it : items) arr.push_back(parse_value(it));
            doc[name] = arr;
        } else {
            doc[name] = parse_value(items.back());
        }
    }
    return doc;
}

std::vector<double> table_two_times() { return {100, 200, 300, 400, 500, 600, 200 * pi, 700}; }

QDerivativeMethod derivative_method(const std::string& s) {
    return s == "analytic" ? QDerivativeMethod::Analytic : QDerivativeMethod::FiniteDifference;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cavity with a moving dielectric slab: spectra, modes and field dynamics", "mimcav"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string write_config;

    Cavity cav;
    Output o;

    // spectrum
    int count = 20;
    double tol = kDefaultRootTol;
    auto* spectrum = app.add_subcommand("spectrum", "eigenfrequencies with first-order estimates and error bounds");
    add_cavity(spectrum, cav, true);
    spectrum->add_option("--count", count, "number of frequencies")->check(CLI::PositiveNumber);
    spectrum->add_option("--tol", tol, "root tolerance")->check(CLI::PositiveNumber);

    // structural
    std::optional<int> sn, sk;
    int n_max = 12, k_max = 6, grid = 100;
    bool verify = false;
    auto* structural = app.add_subcommand("structural", "position-independent frequencies");
    add_cavity(structural, cav, false);
    structural->add_option("--n", sn, "index n (with --k)");
    structural->add_option("--k", sk, "index k (with --n)");
    structural->add_option("--n-max", n_max, "enumeration bound on n")->check(CLI::PositiveNumber);
    structural->add_option("--k-max", k_max, "enumeration bound on k")->check(CLI::PositiveNumber);
    structural->add_flag("--verify", verify, "check the frequency equation on a beta grid");
    structural->add_option("--grid", grid, "beta grid points for --verify")->check(CLI::PositiveNumber);

    // midpoint
    int mid_n = 3;
    auto* midpoint = app.add_subcommand("midpoint", "explicit family for a centred slab");
    add_cavity(midpoint, cav, false);
    midpoint->add_option("--n-max", mid_n, "largest n")->check(CLI::NonNegativeNumber);

    // sweep
    int points = 100, sweep_count = 29;
    auto* sweep = app.add_subcommand("sweep", "frequencies over a grid of slab positions (long format)");
    add_cavity(sweep, cav, false);
    sweep->add_option("--points", points, "beta grid points")->check(CLI::PositiveNumber);
    sweep->add_option("--count", sweep_count, "frequencies per position")->check(CLI::PositiveNumber);

    // modes
    int mode_count = 4, mode_points = 201;
    auto* modes_cmd = app.add_subcommand("modes", "sampled normalized mode profiles (long format)");
    add_cavity(modes_cmd, cav, true);
    modes_cmd->add_option("--count", mode_count, "number of modes")->check(CLI::PositiveNumber);
    modes_cmd->add_option("--points", mode_points, "xi samples")->check(CLI::Range(2, 1000000));

    // couplings
    int coupling_count = 4;
    std::string method = "fd";
    auto* couplings = app.add_subcommand("couplings", "Omega, theta and Gamma matrices");
    add_cavity(couplings, cav, true);
    couplings->add_option("--count", coupling_count, "truncation size M")->check(CLI::PositiveNumber);
    couplings->add_option("--method", method, "fd or analytic q-derivative")->check(CLI::IsMember({"fd", "analytic"}));

    // simulate
    double center = 1.2179272, amplitude = 0.1, frequency = 0.01;
    int init_mode = 1, m_track = 4, m_series = 10, grid_points = 201, profile_points = 201;
    double g0 = 1.0, g1 = 0.0, rtol = 1e-9, atol = 1e-12;
    std::vector<double> times, profile_times;
    std::string profiles_path, frequencies = "exact";
    bool cross = false;
    auto* simulate = app.add_subcommand("simulate", "Galerkin field dynamics vs. the multiple-scales solution");
    add_cavity(simulate, cav, false);
    simulate->add_option("--center", center, "trajectory centre");
    simulate->add_option("--amplitude", amplitude, "trajectory amplitude");
    simulate->add_option("--frequency", frequency, "trajectory angular frequency");
    simulate->add_option("--mode", init_mode, "initially excited mode N")->check(CLI::PositiveNumber);
    simulate->add_option("--g0", g0, "initial coefficient c_N(0)");
    simulate->add_option("--g1", g1, "initial derivative c_N'(0)");
    simulate->add_option("--m-track", m_track, "reported coefficients")->check(CLI::PositiveNumber);
    simulate->add_option("--m-series", m_series, "integrated coefficients")->check(CLI::PositiveNumber);
    simulate->add_option("--times", times, "diagnostic times (default: 100..700 and 200 pi)")->delimiter(',');
    simulate->add_option("--profile-times", profile_times, "profile times (default 0,100,190)")->delimiter(',');
    simulate->add_option("--profile-points", profile_points, "xi samples per profile")->check(CLI::Range(2, 1000000));
    simulate->add_option("--profiles", profiles_path, "file for the potential profiles");
    simulate->add_option("--frequencies", frequencies, "exact or first-order")
        ->check(CLI::IsMember({"exact", "first-order"}));
    simulate->add_option("--method", method, "fd or analytic q-derivative")->check(CLI::IsMember({"fd", "analytic"}));
    simulate->add_option("--grid-points", grid_points, "coefficient table grid")->check(CLI::Range(6, 100000));
    simulate->add_option("--rtol", rtol, "integrator relative tolerance")->check(CLI::PositiveNumber);
    simulate->add_option("--atol", atol, "integrator absolute tolerance")->check(CLI::PositiveNumber);
    simulate->add_flag("--cross", cross, "include the cross-mode sum in the multiple-scales solution");

    std::set<std::string> names;
    for (auto* sub : app.get_subcommands({})) {
        add_output(sub, o);
        sub->add_option("--write-config", write_config, "save the effective options as JSON");
        names.insert(sub->get_name());
    }

    try {
        auto args = merge_config(raw_args, names);
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!write_config.empty()) {
            std::ostringstream s;
            s << config_of(sub).dump(2) << '\n';
            io::write_text(write_config, s.str(), out);
        }

        if (sub == spectrum) {
            const auto cfg = cav.config();
            const auto pos = cav.position(cfg);
            Table t{{"n", "omega", "omega_a", "delta_bound", "percent"}, {}};
            for (const auto& r : comparison_table(cfg, pos.beta, count, tol))
                t.add({std::int64_t{r.n}, r.omega, r.omega_a, r.delta_bound, r.percent});
            emit(t, o, o.path, out);
        } else if (sub == structural) {
            if (sn.has_value() != sk.has_value()) throw UsageError("--n and --k go together");
            const double alpha = cav.refractive();
            if (!cav.xi_L) throw UsageError("--xi-l is required");
            std::vector<StructuralFrequency> set;
            CavityConfig cfg;
            if (sn) {
                if (*sn < 1 || *sk < 1) throw UsageError("--n and --k must be positive");
                const auto sf = structural_frequency(*cav.xi_L, alpha, *sn, *sk);
                cfg = make_config_alpha(*cav.xi_L, cav.delta.value_or(sf.delta_required), alpha);
                set.push_back(sf);
            } else {
                cfg = make_config_alpha(*cav.xi_L, cav.delta.value_or(0.5 * *cav.xi_L), alpha);
                set = cav.delta ? structural_for_width(cfg, n_max, k_max) : structural_set(cfg, n_max, k_max);
            }
            Table t{{"n", "k", "omega", "omega_over_pi", "width"}, {}};
            if (verify) {
                if (!cav.delta && !sn) throw UsageError("--verify needs --delta or --n/--k");
                for (const char* c : {"max_residual", "worst_beta", "in_spectrum", "status"}) t.columns.emplace_back(c);
            }
            const auto betas = interior_beta_grid(cfg, grid);
            for (const auto& sf : set) {
                std::vector<io::Cell> row{std::int64_t{sf.n}, std::int64_t{sf.k}, sf.omega, sf.omega / pi, sf.delta_required};
                if (verify) {
                    const auto rep = verify_structural(cfg, sf, betas);
                    row.insert(row.end(), {rep.max_residual, rep.worst_beta, std::string(rep.in_every_spectrum ? "yes" : "no"),
                                           std::string(rep.pass ? "PASS" : "FAIL")});
                }
                t.add(std::move(row));
            }
            emit(t, o, o.path, out);
        } else if (sub == midpoint) {
            if (!cav.xi_L) throw UsageError("--xi-l is required");
            const double alpha = cav.refractive();
            Table t{{"n", "gamma", "delta", "omega", "residual"}, {}};
            for (const auto& m : midpoint_family(*cav.xi_L, alpha, mid_n)) {
                const auto cfg = make_config_alpha(*cav.xi_L, m.delta_n, alpha);
                const double beta = 0.5 * (1.0 - m.delta_n / *cav.xi_L);
                t.add({std::int64_t{m.n}, m.gamma, m.delta_n, m.omega_n, residual(cfg, beta, m.omega_n)});
            }
            emit(t, o, o.path, out);
        } else if (sub == sweep) {
            const auto cfg = cav.config();
            const auto betas = interior_beta_grid(cfg, points);
            std::vector<Spectrum> spectra(betas.size());
            parallel_for(static_cast<int>(betas.size()), default_thread_count(), [&](int i) {
                spectra[static_cast<std::size_t>(i)] =
                    solve_spectrum(cfg, position_from_beta(cfg, betas[static_cast<std::size_t>(i)]), sweep_count);
            });
            Table t{{"beta", "n", "omega"}, {}};
            for (std::size_t i = 0; i < betas.size(); ++i)
                for (std::size_t n = 0; n < spectra[i].omegas.size(); ++n)
                    t.add({betas[i], static_cast<std::int64_t>(n + 1), spectra[i].omegas[n]});
            emit(t, o, o.path, out);
        } else if (sub == modes_cmd) {
            const auto cfg = cav.config();
            const auto pos = cav.position(cfg);
            Table t{{"n", "xi", "value"}, {}};
            for (const auto& m : modes(cfg, pos, mode_count))
                for (int i = 0; i < mode_points; ++i) {
                    const double xi = cfg.xi_L * i / (mode_points - 1);
                    t.add({std::int64_t{m.n}, xi, m.value(xi)});
                }
            emit(t, o, o.path, out);
        } else if (sub == couplings) {
            const auto cfg = cav.config();
            const auto cm = coupling_matrices(cfg, cav.position(cfg), coupling_count, derivative_method(method));
            Table t{{"m", "n", "omega_m", "Omega", "theta", "Gamma"}, {}};
            for (int m = 0; m < cm.M; ++m)
                for (int n = 0; n < cm.M; ++n)
                    t.add({std::int64_t{m + 1}, std::int64_t{n + 1}, cm.omega[static_cast<std::size_t>(m)], cm.Omega(m, n),
                           cm.theta(m, n), cm.Gamma(m, n)});
            emit(t, o, o.path, out);
        } else if (sub == simulate) {
            const auto cfg = cav.config();
            if (m_track > m_series) throw UsageError("--m-track must not exceed --m-series");
            if (init_mode > m_track) throw UsageError("--mode must be tracked");
            if (times.empty()) times = table_two_times();
            if (profile_times.empty()) profile_times = {0.0, 100.0, 190.0};
            auto traj = oscillating_trajectory(center, amplitude, frequency);
            const auto check = check_trajectory(cfg, traj, std::max(times.back(), profile_times.back()));
            if (!check.in_range) throw UsageError("trajectory leaves the cavity");
            for (const auto& w : check.warnings) err << "warning: " << w << "\n";

            TableOptions opts;
            opts.modes = m_series;
            opts.grid_points = grid_points;
            opts.method = derivative_method(method);
            opts.frequencies = frequencies == "first-order" ? FrequencyModel::FirstOrder : FrequencyModel::Exact;
            const CoefficientTables tab(cfg, traj, opts);
            const InitialCondition init{init_mode, g0, g1};
            IntegratorOptions iopt;
            iopt.rel_tol = rtol;
            iopt.abs_tol = atol;

            std::vector<double> all = times;
            all.insert(all.end(), profile_times.begin(), profile_times.end());
            std::sort(all.begin(), all.end());
            all.erase(std::unique(all.begin(), all.end()), all.end());
            const auto run = integrate_modes(tab, init, m_track, m_series, all, iopt);
            const MultipleScales ms(tab, init);

            Table t{{"tau", "q", "a", "b", "d", "a_quadrature", "b_quadrature", "d_quadrature"}, {}};
            for (int n = 1; n <= m_track; ++n) t.columns.push_back("c" + std::to_string(n));
            for (double tau : times) {
                const auto& s = run.at(tau);
                const auto dm = diagnostics(s, ms, cross);
                const auto dq = diagnostics_quadrature(tab, s, ms, cross);
                std::vector<io::Cell> row{tau, s.q, dm.a, dm.b, dm.d, dq.a, dq.b, dq.d};
                for (double c : s.c) row.emplace_back(c);
                t.add(std::move(row));
            }
            emit(t, o, o.path, out);

            if (!profiles_path.empty()) {
                Table p{{"tau", "xi", "galerkin", "multiple_scales", "difference"}, {}};
                for (double tau : profile_times) {
                    const auto& s = run.at(tau);
                    const auto basis = tab.modes_at(s.q, m_track);
                    const auto msc = ms.coefficients(tau, m_track, cross);
                    for (int i = 0; i < profile_points; ++i) {
                        const double xi = cfg.xi_L * i / (profile_points - 1);
                        double gal = 0.0, mul = 0.0;
                        for (int n = 0; n < m_track; ++n) {
                            const double g = basis[static_cast<std::size_t>(n)].value(xi);
                            gal += s.c[static_cast<std::size_t>(n)] * g;
                            mul += msc[static_cast<std::size_t>(n)] * g;
                        }
                        p.add({tau, xi, gal, mul, gal - mul});
                    }
                }
                emit(p, o, profiles_path, out);
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mim::cli
