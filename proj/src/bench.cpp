#include "modalkit/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include "modalkit/perturb.hpp"

namespace modalkit
{

namespace
{

std::string fmt(double x) { return io::format_double(x); }

std::string fmt_optional(const std::optional<double>& x)
{
    return x ? fmt(*x) : std::string();
}

constexpr double error_bin_width = 0.05;
constexpr int error_bins         = 40;

} // namespace

std::vector<double> BenchConfig::default_sigma_cases()
{
    const double r2 = std::sqrt(2.0);
    return {2.0 * r2, r2, r2 / 3.0, r2 / 10.0};
}

void BenchConfig::validate() const
{
    model.validate();
    hp.validate();
    require(replications >= 1, "replications must be >= 1");
    require(!sigma_cases.empty(), "sigma_cases must not be empty");
    for (double s : sigma_cases)
        require(s > 0.0, "sigma cases must be positive");
    require(run_standard || run_proposed, "no method selected");
    if (run_standard)
        require(n_standard >= 6, "n_standard must be >= 6");
    if (run_proposed)
        require(n_proposed >= 2 * hp.p_tilde,
                "n_proposed must be >= 2 * p_tilde");
}

BenchConfig bench_config_from_json(const io::Json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "bench config must be an object");
    BenchConfig c;
    c.sigma_cases = BenchConfig::default_sigma_cases();
    for (const auto& [key, value] : j.items())
    {
        try
        {
            if (key == "model")
                c.model = io::any_model_from_json(value);
            else if (key == "n_standard")
                c.n_standard = value.get<Index>();
            else if (key == "n_proposed")
                c.n_proposed = value.get<Index>();
            else if (key == "sigma_cases")
                c.sigma_cases = value.get<std::vector<double>>();
            else if (key == "replications")
                c.replications = value.get<Index>();
            else if (key == "hyperparameters")
                io::apply_hyperparameters(value, c.hp);
            else if (key == "seed")
                c.seed = value.get<std::uint64_t>();
            else if (key == "output_dir")
                c.output_dir = value.get<std::string>();
            else if (key == "methods")
            {
                const auto m   = value.get<std::vector<std::string>>();
                c.run_standard = false;
                c.run_proposed = false;
                for (const auto& name : m)
                {
                    if (name == "standard")
                        c.run_standard = true;
                    else if (name == "proposed")
                        c.run_proposed = true;
                    else
                        throw Error(ErrorCode::Parse,
                                    "unknown method '" + name + "'");
                }
            }
            else
                throw Error(ErrorCode::Parse,
                            "unknown bench config key '" + key + "'");
        }
        catch (const nlohmann::json::exception&)
        {
            throw Error(ErrorCode::Parse,
                        "bench config key '" + key + "' has the wrong type");
        }
    }
    c.validate();
    return c;
}

io::Json bench_config_to_json(const BenchConfig& c)
{
    io::Json methods = io::Json::array();
    if (c.run_standard)
        methods.push_back("standard");
    if (c.run_proposed)
        methods.push_back("proposed");
    return io::Json{{"model", io::model_to_json(c.model)},
                    {"n_standard", c.n_standard},
                    {"n_proposed", c.n_proposed},
                    {"sigma_cases", c.sigma_cases},
                    {"replications", c.replications},
                    {"hyperparameters", io::hyperparameters_to_json(c.hp)},
                    {"seed", c.seed},
                    {"methods", methods}};
}

std::uint64_t bench_data_seed(std::uint64_t master, std::size_t sigma_case,
                              Index replication)
{
    return derive_seed(master, sigma_case,
                       static_cast<std::uint64_t>(replication));
}

std::uint64_t bench_estimate_seed(std::uint64_t data_seed)
{
    return derive_seed(data_seed, 1);
}

unsigned bench_threads()
{
    if (const char* env = std::getenv("MODALKIT_THREADS"))
    {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ReplicationRecord run_replication(const BenchConfig& config,
                                  std::size_t sigma_case, Index replication)
{
    const double sigma = config.sigma_cases.at(sigma_case);
    ReplicationRecord rec;
    rec.sigma_case    = sigma_case;
    rec.replication   = replication;
    rec.data_seed     = bench_data_seed(config.seed, sigma_case, replication);
    rec.estimate_seed = bench_estimate_seed(rec.data_seed);
    rec.standard.sigma = sigma;
    rec.proposed.sigma = sigma;

    const Index n = std::max(config.run_standard ? config.n_standard : 0,
                             config.run_proposed ? config.n_proposed : 0);
    const SignalSamples data =
        add_noise(synthesize(config.model, n), sigma, rec.data_seed);

    if (config.run_standard)
    {
        try
        {
            const auto g = gpof_grid_search(data.a.head(config.n_standard));
            rec.standard = relative_error(config.model, g.model, sigma);
            rec.standard_m_ott = g.m_ott;
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::NoModel)
                throw;
        }
    }
    if (config.run_proposed)
    {
        const auto r = estimate(data.a.head(config.n_proposed), sigma,
                                config.hp, rec.estimate_seed);
        rec.proposed_regions = r.region_count;
        if (r.p_ott > 0)
            rec.proposed =
                relative_error(config.model, ModalModel{r.c_hat, r.xi_hat},
                               sigma);
        rec.proposed.p_ott = r.p_ott;
    }
    return rec;
}

BenchResult run_bench(const BenchConfig& config, unsigned threads)
{
    config.validate();
    BenchResult out;
    out.config       = config;
    const auto cases = config.sigma_cases.size();
    const auto reps  = static_cast<std::size_t>(config.replications);
    out.records.resize(cases * reps);

    if (threads == 0)
        threads = bench_threads();
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, out.records.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;)
        {
            const std::size_t k = next.fetch_add(1);
            if (k >= out.records.size())
                return;
            try
            {
                out.records[k] = run_replication(
                    config, k / reps, static_cast<Index>(k % reps));
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = out.records.size();
                return;
            }
        }
    };
    if (threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    for (std::size_t c = 0; c < cases; ++c)
    {
        std::vector<ErrorRecord> standard, proposed;
        for (std::size_t h = 0; h < reps; ++h)
        {
            standard.push_back(out.records[c * reps + h].standard);
            proposed.push_back(out.records[c * reps + h].proposed);
        }
        CaseSummary s;
        s.sigma   = config.sigma_cases[c];
        s.min_snr = snr(config.model, s.sigma).min;
        if (config.run_standard)
            s.standard = mse_aggregate(standard);
        if (config.run_proposed)
            s.proposed = mse_aggregate(proposed);
        out.cases.push_back(s);
    }
    return out;
}

void write_bench(const BenchResult& result)
{
    const auto& cfg = result.config;
    const auto dir  = cfg.output_dir;
    std::vector<std::pair<std::string, bool>> methods;
    if (cfg.run_standard)
        methods.emplace_back("standard", true);
    if (cfg.run_proposed)
        methods.emplace_back("proposed", false);
    auto pick = [](const ReplicationRecord& r, bool standard) {
        return standard ? r.standard : r.proposed;
    };

    std::string table = "method,case,sigma,min_snr,n_sigma,replications,mse\n";
    io::Json summary_cases = io::Json::array();
    for (std::size_t c = 0; c < result.cases.size(); ++c)
    {
        const auto& s = result.cases[c];
        io::Json jc{{"case", c}, {"sigma", s.sigma}, {"min_snr", s.min_snr}};
        for (const auto& [name, standard] : methods)
        {
            const MseSummary& m = standard ? s.standard : s.proposed;
            table += name + "," + std::to_string(c) + "," + fmt(s.sigma) +
                     "," + fmt(s.min_snr) + "," + std::to_string(m.n_sigma) +
                     "," + std::to_string(cfg.replications) + "," +
                     fmt_optional(m.mse) + "\n";
            jc[name] = {{"n_sigma", m.n_sigma},
                        {"mse", m.mse ? io::Json(*m.mse) : io::Json(nullptr)}};
        }
        summary_cases.push_back(jc);
    }
    io::write_text(dir / "table.csv", table);

    std::string reps = "case,replication,sigma,data_seed,estimate_seed";
    if (cfg.run_standard)
        reps += ",standard_p_ott,standard_m_ott,standard_e";
    if (cfg.run_proposed)
        reps += ",proposed_p_ott,proposed_regions,proposed_e";
    reps += "\n";
    for (const auto& r : result.records)
    {
        reps += std::to_string(r.sigma_case) + "," +
                std::to_string(r.replication) + "," +
                fmt(cfg.sigma_cases[r.sigma_case]) + "," +
                std::to_string(r.data_seed) + "," +
                std::to_string(r.estimate_seed);
        if (cfg.run_standard)
            reps += "," + std::to_string(r.standard.p_ott) + "," +
                    std::to_string(r.standard_m_ott) + "," +
                    fmt(r.standard.e);
        if (cfg.run_proposed)
            reps += "," + std::to_string(r.proposed.p_ott) + "," +
                    std::to_string(r.proposed_regions) + "," +
                    fmt(r.proposed.e);
        reps += "\n";
    }
    io::write_text(dir / "replications.csv", reps);

    std::string pdist = "method,case,p_ott,count\n";
    std::string edist = "method,case,bin_lo,bin_hi,count\n";
    const auto nrep   = static_cast<std::size_t>(cfg.replications);
    for (const auto& [name, standard] : methods)
        for (std::size_t c = 0; c < result.cases.size(); ++c)
        {
            std::map<Index, Index> counts;
            std::vector<Index> bins(error_bins + 1, 0);
            Index failed = 0;
            for (std::size_t h = 0; h < nrep; ++h)
            {
                const auto e = pick(result.records[c * nrep + h], standard);
                ++counts[e.p_ott];
                if (e.e < 0.0)
                    ++failed;
                else
                    ++bins[std::min<std::size_t>(
                        static_cast<std::size_t>(e.e / error_bin_width),
                        error_bins)];
            }
            for (const auto& [p, k] : counts)
                pdist += name + "," + std::to_string(c) + "," +
                         std::to_string(p) + "," + std::to_string(k) + "\n";
            edist += name + "," + std::to_string(c) + ",-1,-1," +
                     std::to_string(failed) + "\n";
            for (int b = 0; b <= error_bins; ++b)
            {
                const double lo = b * error_bin_width;
                const std::string hi =
                    b == error_bins ? "inf" : fmt((b + 1) * error_bin_width);
                edist += name + "," + std::to_string(c) + "," + fmt(lo) +
                         "," + hi + "," +
                         std::to_string(bins[static_cast<std::size_t>(b)]) +
                         "\n";
            }
        }
    io::write_text(dir / "p_ott_distribution.csv", pdist);
    io::write_text(dir / "error_distribution.csv", edist);

    io::write_json(dir / "summary.json",
                   io::Json{{"config", bench_config_to_json(cfg)},
                            {"cases", summary_cases}});
}

} // namespace modalkit
