// Command-line front end: simulation, fitting, dependence summaries, study
// replication, and the station-data pipeline. All outputs are CSV/JSON under
// --out; every stochastic command requires a --seed and is reproducible.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "maxconv/data.hpp"
#include "maxconv/errors.hpp"
#include "maxconv/fit.hpp"
#include "maxconv/measures.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/simulate.hpp"
#include "maxconv/studies.hpp"
#include "maxconv/tailtheory.hpp"

namespace fs = std::filesystem;
using namespace maxconv;

namespace {

struct ModelFlags {
    std::string family = "M3";
    double r = 0.4, rL = 0.0, theta_R = 1.0;
    double q = 0.2, theta_Y = 0.5, alpha_Y = 1.0, beta = 1.2, nu = 4.0;
    double theta = 1.0, alpha = 1.0;

    copula::ModelParams params() const {
        copula::ModelParams mp;
        mp.rU = r;
        mp.rL = rL;
        mp.theta_R = theta_R;
        mp.q = q;
        mp.theta_Y = theta_Y;
        mp.alpha_Y = alpha_Y;
        mp.beta = beta;
        mp.nu = nu;
        mp.theta = theta;
        mp.alpha = alpha;
        return mp;
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--family", mf.family, "model family M1..M5");
    cmd->add_option("--r", mf.r, "disk radius upper bound rU");
    cmd->add_option("--rL", mf.rL, "disk radius lower bound");
    cmd->add_option("--theta-R", mf.theta_R, "radius-process range");
    cmd->add_option("--q", mf.q, "mixture weight");
    cmd->add_option("--theta-Y", mf.theta_Y, "companion range");
    cmd->add_option("--alpha-Y", mf.alpha_Y, "companion smoothness");
    cmd->add_option("--beta", mf.beta, "companion Frechet tail index");
    cmd->add_option("--nu", mf.nu, "Student-t degrees of freedom");
    cmd->add_option("--theta", mf.theta, "M1/M2 correlation range");
    cmd->add_option("--alpha", mf.alpha, "M1/M2 correlation smoothness");
}

rf::SiteSet load_sites(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open site file " + path);
    rf::SiteSet s;
    std::string line;
    std::getline(in, line);  // header x,y
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
            throw data_error("bad site row at line " + std::to_string(ln));
        s.pts.push_back({std::stod(a), std::stod(b)});
    }
    if (s.pts.empty()) throw data_error("no sites in " + path);
    return s;
}

Matrix load_matrix_csv(const std::string& path, std::vector<std::string>* header_out) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty file " + path);
    std::vector<std::string> header;
    {
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) header.push_back(c);
    }
    std::vector<std::vector<double>> rows;
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string c;
        std::vector<double> row;
        while (std::getline(ls, c, ',')) row.push_back(std::stod(c));
        if (row.size() != header.size())
            throw data_error("ragged row at line " + std::to_string(ln));
        rows.push_back(std::move(row));
    }
    Matrix m(rows.size(), header.size());
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.p; ++j) m.at(i, j) = rows[i][j];
    if (header_out) *header_out = header;
    return m;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw data_error("cannot write " + p.string());
    out << content;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ls(s);
    std::string c;
    while (std::getline(ls, c, ','))
        if (!c.empty()) out.push_back(std::stod(c));
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"max-convolution spatial process toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int threads = 0;
    std::string config_path;
    app.add_option("--seed", seed, "master seed")->required(false);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");
    app.add_option("--config", config_path, "JSON config with option defaults");

    // ---- simulate ----
    auto* c_sim = app.add_subcommand("simulate", "simulate the process at sites");
    ModelFlags sim_mf;
    add_model_flags(c_sim, sim_mf);
    std::string sim_sites_file;
    std::size_t sim_p = 10;
    double sim_domain = 1.0;
    std::size_t sim_n = 100;
    int sim_cells = 50;
    int sim_rasters = 0;
    c_sim->add_option("--sites", sim_sites_file, "site CSV (x,y)");
    c_sim->add_option("--p", sim_p, "number of random-uniform sites");
    c_sim->add_option("--domain", sim_domain, "square domain side");
    c_sim->add_option("--n", sim_n, "number of replicates");
    c_sim->add_option("--grid-cells", sim_cells, "raster cells per rU");
    c_sim->add_option("--rasters", sim_rasters, "also export this many raster fields");

    // ---- fit ----
    auto* c_fit = app.add_subcommand("fit", "weighted pairwise-likelihood fit");
    ModelFlags fit_mf;
    add_model_flags(c_fit, fit_mf);
    std::string fit_data, fit_sites;
    double fit_dmax = 0.25;
    int fit_order = 35;
    bool fit_pseudo = false;
    double fit_fix_thetaR = 0.0;
    c_fit->add_option("--data", fit_data, "CSV matrix, rows = replicates")->required();
    c_fit->add_option("--sites", fit_sites, "site CSV (x,y)")->required();
    c_fit->add_option("--d-max", fit_dmax, "pair weight cutoff distance");
    c_fit->add_option("--order", fit_order, "quadrature order");
    c_fit->add_flag("--pseudo", fit_pseudo, "input is already on the (0,1) scale");
    c_fit->add_option("--fix-theta-R", fit_fix_thetaR, "fix theta_R at this value");

    // ---- summary ----
    auto* c_sum = app.add_subcommand("summary", "dependence summaries");
    ModelFlags sum_mf;
    add_model_flags(c_sum, sum_mf);
    std::string sum_grid = "0:1:21";
    std::string sum_data, sum_sites, sum_bins = "0.2,0.4";
    int sum_order = 35;
    c_sum->add_option("--h-grid", sum_grid, "theory curve grid lo:hi:n");
    c_sum->add_option("--order", sum_order, "quadrature order");
    c_sum->add_option("--data", sum_data, "empirical table from this CSV matrix");
    c_sum->add_option("--sites", sum_sites, "site CSV for the empirical table");
    c_sum->add_option("--bins", sum_bins, "distance bin edges");

    // ---- replicate-study ----
    auto* c_study = app.add_subcommand("replicate-study", "desk-scale study replication");
    int study_id = 1;
    std::size_t study_p = 20, study_n = 500;
    int study_N = 30;
    double study_dmax = 0.0;
    int study_order = 25;
    c_study->add_option("--study", study_id, "study id 1|2|3")->required();
    c_study->add_option("--p", study_p, "sites per dataset");
    c_study->add_option("--n", study_n, "replicates per dataset");
    c_study->add_option("--N", study_N, "number of simulated datasets");
    c_study->add_option("--d-max", study_dmax, "pair cutoff (0 = study default)");
    c_study->add_option("--order", study_order, "fitting quadrature order");

    // ---- pipeline ----
    auto* c_pipe = app.add_subcommand("pipeline", "station-data pipeline");
    std::string pipe_data;
    std::string pipe_families = "M1,M3,M4";
    std::string pipe_fixture;
    std::size_t pipe_p = 20, pipe_n = 153;
    int pipe_splits = 10;
    double pipe_dmax = 0.5;
    std::string pipe_bins = "0.2,0.4";
    std::string pipe_negate = "auto";
    std::string pipe_dist = "euclidean";
    int pipe_order = 25;
    ModelFlags pipe_mf;
    add_model_flags(c_pipe, pipe_mf);
    c_pipe->add_option("--data", pipe_data, "station CSV (station_id,lat,lon,date,value)");
    c_pipe->add_option("--fixture", pipe_fixture, "generate a fixture from this family");
    c_pipe->add_option("--p", pipe_p, "fixture station count");
    c_pipe->add_option("--n", pipe_n, "fixture day count");
    c_pipe->add_option("--families", pipe_families, "families to fit");
    c_pipe->add_option("--splits", pipe_splits, "train/holdout repetitions");
    c_pipe->add_option("--d-max", pipe_dmax, "fitting pair cutoff");
    c_pipe->add_option("--bins", pipe_bins, "distance bin edges");
    c_pipe->add_option("--negate", pipe_negate, "auto|on|off");
    c_pipe->add_option("--dist", pipe_dist, "euclidean|greatcircle");
    c_pipe->add_option("--order", pipe_order, "fitting quadrature order");

    // config file provides defaults; command-line flags win
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            std::ifstream in(args[i + 1]);
            if (!in) throw data_error("cannot open config " + args[i + 1]);
            nlohmann::json j;
            in >> j;
            std::vector<std::string> pre;
            for (auto& [k, v] : j.items()) {
                pre.push_back("--" + k);
                pre.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            }
            args.insert(args.begin(), pre.begin(), pre.end());
            break;
        }
    }
    std::vector<const char*> cargv{"maxconv-cli"};
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const fs::path out(out_dir);
    fs::create_directories(out);

    if (c_sim->parsed()) {
        const auto mp = sim_mf.params();
        const auto fam = copula::family_from_name(sim_mf.family);
        Rng site_rng(seed, 1);
        const rf::SiteSet sites = sim_sites_file.empty()
                                      ? rf::SiteSet::random_uniform(sim_p, 0.0,
                                                                    sim_domain, site_rng)
                                      : load_sites(sim_sites_file);
        const auto grid = sim::make_grid(sites, mp.rU, sim_cells);
        std::ostringstream rcsv;
        rcsv << "replicate,site,x,y,value\n";
        std::ostringstream fields;
        if (fam == copula::Family::M3_maxconv) {
            const sim::RasterSimulator s(sites, sim::DiskModelParams{copula::radius_spec(mp)},
                                         grid);
            Rng rng(seed, 2);
            std::vector<double> field;
            for (std::size_t i = 0; i < sim_n; ++i) {
                const auto z = s.replicate_field(rng, field);
                for (std::size_t j = 0; j < sites.size(); ++j)
                    rcsv << i << "," << j << "," << sites.pts[j].x << ","
                         << sites.pts[j].y << "," << z[j] << "\n";
                if (static_cast<int>(i) < sim_rasters) {
                    std::ostringstream fcsv;
                    fcsv << "# cell=" << grid.cell << " x0=" << grid.x0
                         << " y0=" << grid.y0 << " nx=" << grid.nx << " ny=" << grid.ny
                         << "\n";
                    for (int iy = 0; iy < grid.ny; ++iy) {
                        for (int ix = 0; ix < grid.nx; ++ix)
                            fcsv << (ix ? "," : "")
                                 << field[static_cast<std::size_t>(iy) * grid.nx + ix];
                        fcsv << "\n";
                    }
                    write_file(out / ("raster_" + std::to_string(i) + ".csv"),
                               fcsv.str());
                }
            }
        } else if (fam == copula::Family::M4_mix_gaussian ||
                   fam == copula::Family::M5_mix_student) {
            const auto mxp = copula::mixture_params(mp, fam);
            const sim::MixtureSimulator s(sites, mxp, grid);
            Rng rng(seed, 2);
            for (std::size_t i = 0; i < sim_n; ++i) {
                const auto z = s.replicate(rng);
                for (std::size_t j = 0; j < sites.size(); ++j)
                    rcsv << i << "," << j << "," << sites.pts[j].x << ","
                         << sites.pts[j].y << "," << z[j] << "\n";
            }
        } else {
            throw std::invalid_argument("simulate supports families M3, M4, M5");
        }
        write_file(out / "realizations.csv", rcsv.str());
        std::cout << "wrote " << (out / "realizations.csv").string() << "\n";
        return 0;
    }

    if (c_fit->parsed()) {
        const auto sites = load_sites(fit_sites);
        const Matrix raw = load_matrix_csv(fit_data, nullptr);
        measures::PseudoObservations u;
        if (fit_pseudo) {
            u.values = raw;
        } else {
            u = measures::rank_transform(raw);
        }
        fit::FitSpec spec = fit::default_fit_spec(copula::family_from_name(fit_mf.family));
        spec.quad_order = fit_order;
        spec.threads = threads;
        if (fit_fix_thetaR > 0.0)
            for (auto& ps : spec.params)
                if (ps.name == "theta_R") {
                    ps.fixed = true;
                    ps.value = fit_fix_thetaR;
                }
        const auto fr = fit::fit_model(u, fit::distance_matrix(sites), spec,
                                       fit::PairWeightRule{fit_dmax, 1.0}, seed);
        write_file(out / "fit.json", fr.to_json());
        std::ostringstream diag;
        diag << "j1,j2,h,loglik\n";
        for (std::size_t k = 0; k < fr.pairs.size(); ++k)
            diag << fr.pairs[k].first << "," << fr.pairs[k].second << ","
                 << sites.dist(fr.pairs[k].first, fr.pairs[k].second) << ","
                 << fr.pair_contributions[k] << "\n";
        write_file(out / "pair_diagnostics.csv", diag.str());
        std::cout << "objective " << fr.objective << ", converged " << fr.converged
                  << "\n";
        return fr.converged ? 0 : 4;
    }

    if (c_sum->parsed()) {
        if (sum_data.empty()) {
            const auto mp = sum_mf.params();
            const auto spec = copula::radius_spec(mp);
            const auto rule = numerics::gauss_legendre(sum_order);
            double lo = 0.0, hi = 1.0;
            int npts = 21;
            std::sscanf(sum_grid.c_str(), "%lf:%lf:%d", &lo, &hi, &npts);
            std::ostringstream csv;
            csv << "h,S_rho,lambda_U,kappa_L\n";
            for (int i = 0; i < npts; ++i) {
                const double h = lo + (hi - lo) * i / std::max(1, npts - 1);
                const auto ts = tail::summarize(h, spec, rule);
                csv << h << "," << ts.spearman << "," << ts.lambda_U << ","
                    << ts.kappa_L << "\n";
            }
            write_file(out / "summary_curve.csv", csv.str());
            std::cout << "wrote " << (out / "summary_curve.csv").string() << "\n";
        } else {
            const auto sites = load_sites(sum_sites);
            const Matrix raw = load_matrix_csv(sum_data, nullptr);
            const auto u = measures::rank_transform(raw);
            const auto bins = studies::binned_dependence(
                u, fit::distance_matrix(sites), parse_list(sum_bins));
            std::ostringstream csv;
            csv << "bin_lo,bin_hi,pairs,S_rho,rho_L,rho_U,rho_N\n";
            for (const auto& b : bins)
                csv << b.lo << "," << b.hi << "," << b.pairs << "," << b.S << ","
                    << b.rhoL << "," << b.rhoU << "," << b.rhoN << "\n";
            write_file(out / "summary_empirical.csv", csv.str());
            std::cout << "wrote " << (out / "summary_empirical.csv").string() << "\n";
        }
        return 0;
    }

    if (c_study->parsed()) {
        studies::StudyConfig cfg;
        cfg.id = study_id;
        cfg.p = study_p;
        cfg.n = study_n;
        cfg.replicates = study_N;
        cfg.d_max = study_dmax;
        cfg.quad_order = study_order;
        cfg.threads = threads;
        cfg.seed = seed;
        if (study_id == 3) {
            const auto r3 = studies::study3_discrepancy(cfg);
            write_file(out / "study3_estimates.csv", r3.fits.to_csv());
            std::ostringstream csv;
            csv << "replicate,dS,dL,dU\n";
            for (std::size_t i = 0; i < r3.discrepancies.size(); ++i)
                csv << i << "," << r3.discrepancies[i].dS << ","
                    << r3.discrepancies[i].dL << "," << r3.discrepancies[i].dU << "\n";
            csv << "mean," << r3.mean.dS << "," << r3.mean.dL << "," << r3.mean.dU
                << "\n";
            write_file(out / "study3_discrepancy.csv", csv.str());
            std::cout << "mean |Delta| S=" << r3.mean.dS << " L=" << r3.mean.dL
                      << " U=" << r3.mean.dU << "\n";
        } else {
            const auto res = studies::replicate_study(cfg);
            write_file(out / ("study" + std::to_string(study_id) + "_rmse.csv"),
                       res.to_csv());
            std::cout << "rmse:";
            for (std::size_t k = 0; k < res.rmse.size(); ++k)
                std::cout << " " << res.param_names[k] << "=" << res.rmse[k];
            std::cout << "\n";
        }
        return 0;
    }

    if (c_pipe->parsed()) {
        data::StationTable table;
        if (!pipe_data.empty()) {
            table = data::ingest_csv(pipe_data);
        } else if (!pipe_fixture.empty()) {
            data::FixtureSpec fs;
            fs.p = pipe_p;
            fs.n = pipe_n;
            fs.family = copula::family_from_name(pipe_fixture);
            fs.params = pipe_mf.params();
            fs.negate_innovations = true;
            table = data::make_fixture(fs, seed);
        } else {
            throw std::invalid_argument("pipeline: need --data or --fixture");
        }
        studies::PipelineConfig cfg;
        cfg.families.clear();
        {
            std::istringstream ls(pipe_families);
            std::string c;
            while (std::getline(ls, c, ','))
                if (!c.empty()) cfg.families.push_back(copula::family_from_name(c));
        }
        cfg.splits = pipe_splits;
        cfg.d_max = pipe_dmax;
        cfg.bin_edges = parse_list(pipe_bins);
        cfg.negate = pipe_negate == "on"
                         ? studies::NegateMode::on
                         : (pipe_negate == "off" ? studies::NegateMode::off
                                                 : studies::NegateMode::automatic);
        cfg.dist_mode = pipe_dist == "greatcircle" ? data::DistanceMode::great_circle_km
                                                   : data::DistanceMode::euclidean;
        cfg.quad_order = pipe_order;
        cfg.threads = threads;
        cfg.seed = seed;
        const auto res = studies::run_pipeline(table, cfg);
        write_file(out / "pipeline_discrepancy.csv", res.to_csv(cfg.bin_edges));
        std::cout << "aggregate |Delta|:";
        for (const auto& [k, v] : res.aggregate) std::cout << " " << k << "=" << v;
        std::cout << (res.negated ? " (negated residuals)" : "") << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const bracketing_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const ill_conditioned_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const degenerate_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
