// modalkit command-line front end.
//
//   modalkit synth    --model m.json --n 120 --sigma 0.14 --seed 3 --output s.csv
//   modalkit estimate --input s.csv --sigma 0.14 --seed 7 [--output r.json]
//   modalkit density  --input s.csv --sigma 0.14 --output-dir out
//   modalkit mle1d    --rho -0.9 --sigma 0.1 --n 20 --output-dir out
//   modalkit bench    --config bench.json --output-dir out
//
// Exit status: 0 success, 1 invalid input or I/O failure, 2 when the
// estimator accepts no mode.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "modalkit/bench.hpp"
#include "modalkit/density.hpp"
#include "modalkit/io.hpp"
#include "modalkit/mle1d.hpp"
#include "modalkit/perturb.hpp"

using namespace modalkit;
namespace fs = std::filesystem;

namespace
{

struct HyperOverrides
{
    std::string config;
    std::optional<int> p_tilde;
    std::optional<double> gamma;
    std::optional<double> tau;
    std::optional<double> beta_factor;
    std::optional<int> pseudo_t;
    std::optional<double> sigma_ratio;
    std::optional<double> alpha;
    std::optional<int> cadzow_iters;
    std::optional<int> lattice_dim;
    std::optional<std::string> region_merge;

    void attach(CLI::App* app, bool with_config)
    {
        if (with_config)
            app->add_option("--config", config,
                            "JSON file with hyperparameters")
                ->check(CLI::ExistingFile);
        app->add_option("--p-tilde", p_tilde, "overestimate of the order");
        app->add_option("--gamma", gamma, "R-diagonal filter exponent");
        app->add_option("--tau", tau, "density peak threshold");
        app->add_option("--beta-factor", beta_factor, "beta / (2 p_tilde)");
        app->add_option("--pseudo-t", pseudo_t, "number of pseudosamples");
        app->add_option("--sigma-ratio", sigma_ratio, "sigma' / sigma");
        app->add_option("--alpha", alpha, "cluster acceptance fraction");
        app->add_option("--cadzow-iters", cadzow_iters,
                        "Cadzow iteration cap");
        app->add_option("--lattice-dim", lattice_dim,
                        "lattice points per axis");
        app->add_option("--region-merge", region_merge,
                        "partition or union")
            ->check(CLI::IsMember({"partition", "union"}));
    }

    void apply(Hyperparameters& hp) const
    {
        if (!config.empty())
        {
            const auto j = io::read_json(config);
            try
            {
                io::apply_hyperparameters(
                    j.contains("hyperparameters") ? j.at("hyperparameters")
                                                  : j,
                    hp);
            }
            catch (const Error& e)
            {
                throw Error(e.code(), config + ": " + e.what());
            }
        }
        if (p_tilde)
            hp.p_tilde = *p_tilde;
        if (gamma)
            hp.gamma = *gamma;
        if (tau)
            hp.tau = *tau;
        if (beta_factor)
            hp.beta_factor = *beta_factor;
        if (pseudo_t)
            hp.pseudo_count = *pseudo_t;
        if (sigma_ratio)
            hp.sigma_ratio = *sigma_ratio;
        if (alpha)
            hp.alpha = *alpha;
        if (cadzow_iters)
            hp.cadzow_iters = *cadzow_iters;
        if (lattice_dim)
            hp.lattice_dim = *lattice_dim;
        if (region_merge)
            hp.region_merge = *region_merge == "union" ? RegionMerge::Union
                                                       : RegionMerge::Partition;
        hp.validate();
    }
};

double resolve_sigma(const std::optional<double>& flag,
                     const SignalSamples& s)
{
    const double sigma = flag ? *flag : s.sigma;
    if (!(sigma > 0.0))
        throw Error(ErrorCode::InvalidArgument,
                    "sigma must be positive (pass --sigma or set it in the "
                    "sidecar)");
    return sigma;
}

void emit_json(const io::Json& j, const std::string& output)
{
    if (output.empty())
        std::cout << j.dump(2) << "\n";
    else
        io::write_json(output, j);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Estimation of sums of complex exponentials"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize noisy samples");
    std::string synth_model, synth_output, synth_dir;
    Index synth_n       = 120;
    double synth_delta  = 1.0;
    double synth_sigma  = 0.0;
    std::uint64_t synth_seed = 1;
    synth->add_option("--model", synth_model,
                      "model JSON (default: five-mode benchmark)")
        ->check(CLI::ExistingFile);
    synth->add_option("--n", synth_n, "sample count")->capture_default_str();
    synth->add_option("--delta", synth_delta, "sampling interval")
        ->capture_default_str();
    synth->add_option("--sigma", synth_sigma, "noise standard deviation")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "noise seed")->capture_default_str();
    synth->add_option("--output", synth_output, "samples CSV path");
    synth->add_option("--output-dir", synth_dir,
                      "directory receiving samples.csv and model.json");

    // estimate
    auto* est = app.add_subcommand("estimate", "run the automatic estimator");
    std::string est_input, est_output, est_dir;
    std::optional<double> est_sigma;
    std::uint64_t est_seed = 1;
    HyperOverrides est_hp;
    est->add_option("--input", est_input, "samples CSV")->required();
    est->add_option("--sigma", est_sigma, "noise standard deviation");
    est->add_option("--seed", est_seed, "pseudosample seed")
        ->capture_default_str();
    est->add_option("--output", est_output, "report JSON path (else stdout)");
    est->add_option("--output-dir", est_dir,
                    "directory receiving report.json");
    est_hp.attach(est, true);

    // density
    auto* dens = app.add_subcommand("density", "condensed density and regions");
    std::string dens_input, dens_dir = ".";
    std::optional<double> dens_sigma;
    HyperOverrides dens_hp;
    dens->add_option("--input", dens_input, "samples CSV")->required();
    dens->add_option("--sigma", dens_sigma, "noise standard deviation");
    dens->add_option("--output-dir", dens_dir,
                     "directory receiving density.csv and regions.json")
        ->capture_default_str();
    dens_hp.attach(dens, true);

    // mle1d
    auto* mle = app.add_subcommand("mle1d", "one-mode MLE density analysis");
    double mle_rho = -0.9, mle_sigma = 0.1;
    std::vector<Index> mle_n{20};
    int mle_points            = 2001;
    Index mle_samples         = 0;
    std::uint64_t mle_seed    = 1;
    std::string mle_dir       = ".";
    mle->add_option("--rho", mle_rho, "true mode")->capture_default_str();
    mle->add_option("--sigma", mle_sigma, "noise standard deviation")
        ->capture_default_str();
    mle->add_option("--n", mle_n, "sample counts for p_n")
        ->capture_default_str();
    mle->add_option("--points", mle_points, "curve resolution")
        ->capture_default_str();
    mle->add_option("--mc-samples", mle_samples,
                    "Monte Carlo replications (0 skips)")
        ->capture_default_str();
    mle->add_option("--seed", mle_seed, "Monte Carlo seed")
        ->capture_default_str();
    mle->add_option("--output-dir", mle_dir, "output directory")
        ->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark");
    std::string bench_config, bench_dir;
    std::optional<std::uint64_t> bench_seed;
    std::optional<Index> bench_reps;
    HyperOverrides bench_hp;
    bench->add_option("--config", bench_config, "bench config JSON")
        ->check(CLI::ExistingFile);
    bench->add_option("--output-dir", bench_dir, "output directory");
    bench->add_option("--seed", bench_seed, "master seed");
    bench->add_option("--replications", bench_reps, "replications per case");
    bench_hp.attach(bench, false);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try
    {
        if (*synth)
        {
            const ModalModel model =
                synth_model.empty()
                    ? benchmark_model()
                    : io::any_model_from_json(io::read_json(synth_model));
            const SignalSamples s = add_noise(
                synthesize(model, synth_n, synth_delta), synth_sigma,
                synth_seed);
            if (synth_output.empty() && synth_dir.empty())
            {
                std::cout << io::samples_csv(s);
                return 0;
            }
            const fs::path csv = synth_output.empty()
                                     ? fs::path(synth_dir) / "samples.csv"
                                     : fs::path(synth_output);
            io::write_samples(csv, s);
            if (!synth_dir.empty())
                io::write_json(fs::path(synth_dir) / "model.json",
                               io::model_to_json(model));
            return 0;
        }

        if (*est)
        {
            const SignalSamples s = io::read_samples(est_input);
            const double sigma    = resolve_sigma(est_sigma, s);
            Hyperparameters hp;
            est_hp.apply(hp);
            const auto report = estimate(s.a, sigma, hp, est_seed);
            std::string out   = est_output;
            if (out.empty() && !est_dir.empty())
                out = (fs::path(est_dir) / "report.json").string();
            emit_json(io::report_to_json(report), out);
            if (report.p_ott == 0)
            {
                std::cerr << "estimate: no cluster accepted"
                          << (report.no_regions ? " (no density regions)" : "")
                          << "\n";
                return 2;
            }
            return 0;
        }

        if (*dens)
        {
            const SignalSamples s = io::read_samples(dens_input);
            const double sigma    = resolve_sigma(dens_sigma, s);
            Hyperparameters hp;
            dens_hp.apply(hp);
            const DensityGrid grid = condensed_density(s.a, hp, sigma);
            const RegionSet regions =
                extract_regions(grid, hp.tau, hp.region_merge);
            io::write_text(fs::path(dens_dir) / "density.csv",
                           io::density_csv(grid));
            io::write_json(fs::path(dens_dir) / "regions.json",
                           io::regions_to_json(regions));
            std::cout << "p_N=" << regions.regions.size() << "\n";
            return 0;
        }

        if (*mle)
        {
            const fs::path dir(mle_dir);
            std::string mse = "n,mse\n";
            for (Index n : mle_n)
            {
                const auto curve = mle1d::pn_curve(mle_rho, mle_sigma, n,
                                                   mle_points);
                io::write_text(dir / ("pn_" + std::to_string(n) + ".csv"),
                               io::curve_csv(curve));
                mse += std::to_string(n) + "," +
                       io::format_double(
                           mle1d::mse_by_quadrature(mle_rho, mle_sigma, n)) +
                       "\n";
            }
            io::write_text(dir / "pinf.csv",
                           io::curve_csv(mle1d::pinf_curve(
                               mle_rho, mle_sigma, mle_points)));
            io::write_text(dir / "p2.csv",
                           io::curve_csv(mle1d::p2_curve(
                               mle_rho, mle_sigma, 5.0, mle_points)));
            mse += "inf," +
                   io::format_double(mle1d::mse_by_quadrature(
                       mle_rho, mle_sigma, std::nullopt)) +
                   "\n";
            if (mle_samples > 0)
            {
                std::string mc = "n,mse\n";
                for (Index n : mle_n)
                {
                    const auto r = mle1d::montecarlo_rho_ml(
                        mle_rho, mle_sigma, n, mle_samples, mle_seed);
                    mc += std::to_string(n) + "," + io::format_double(r.mse) +
                          "\n";
                    mle1d::DensityCurve hist;
                    hist.grid   = r.bin_centers;
                    hist.values = r.histogram;
                    io::write_text(dir / ("mc_" + std::to_string(n) + ".csv"),
                                   io::curve_csv(hist));
                }
                io::write_text(dir / "mse_montecarlo.csv", mc);
            }
            io::write_text(dir / "mse.csv", mse);
            return 0;
        }

        if (*bench)
        {
            BenchConfig cfg;
            cfg.sigma_cases = BenchConfig::default_sigma_cases();
            if (!bench_config.empty())
            {
                try
                {
                    cfg = bench_config_from_json(io::read_json(bench_config));
                }
                catch (const Error& e)
                {
                    throw Error(e.code(), bench_config + ": " + e.what());
                }
            }
            if (!bench_dir.empty())
                cfg.output_dir = bench_dir;
            if (bench_seed)
                cfg.seed = *bench_seed;
            if (bench_reps)
                cfg.replications = *bench_reps;
            bench_hp.apply(cfg.hp);
            const auto result = run_bench(cfg);
            write_bench(result);
            for (std::size_t c = 0; c < result.cases.size(); ++c)
            {
                const auto& s = result.cases[c];
                std::printf("SNR %-5g", s.min_snr);
                if (cfg.run_standard)
                    std::printf("  standard N=%ld MSE=%s",
                                static_cast<long>(s.standard.n_sigma),
                                s.standard.mse
                                    ? io::format_double(*s.standard.mse).c_str()
                                    : "-");
                if (cfg.run_proposed)
                    std::printf("  proposed N=%ld MSE=%s",
                                static_cast<long>(s.proposed.n_sigma),
                                s.proposed.mse
                                    ? io::format_double(*s.proposed.mse).c_str()
                                    : "-");
                std::printf("\n");
            }
            return 0;
        }
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
