#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modalkit/baseline.hpp"
#include "modalkit/io.hpp"
#include "modalkit/model.hpp"

namespace modalkit
{

///
/// Monte Carlo comparison of the grid-search baseline and the automatic
/// estimator on one ground-truth model across several noise levels.
///
struct BenchConfig
{
    ModalModel model = benchmark_model();
    Index n_standard = 120;
    Index n_proposed = 80;
    std::vector<double> sigma_cases;
    Index replications = 100;
    Hyperparameters hp;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "bench_out";
    bool run_standard = true;
    bool run_proposed = true;

    /// sigma = {2 sqrt 2, sqrt 2, sqrt 2 / 3, sqrt 2 / 10}: minimum SNR of
    /// 0.5, 1, 3 and 10 for the benchmark model.
    static std::vector<double> default_sigma_cases();

    void validate() const;
};

BenchConfig bench_config_from_json(const io::Json& j);
io::Json bench_config_to_json(const BenchConfig& c);

struct ReplicationRecord
{
    std::size_t sigma_case = 0;
    Index replication      = 0;
    std::uint64_t data_seed     = 0;
    std::uint64_t estimate_seed = 0;
    ErrorRecord standard;
    Index standard_m_ott = 0;
    ErrorRecord proposed;
    Index proposed_regions = 0;
};

struct CaseSummary
{
    double sigma   = 0.0;
    double min_snr = 0.0;
    MseSummary standard;
    MseSummary proposed;
};

struct BenchResult
{
    BenchConfig config;
    std::vector<ReplicationRecord> records; ///< ordered by (case, replication)
    std::vector<CaseSummary> cases;
};

/// Seeds of replication h in case c: the data seed mixes (master, c, h); the
/// estimator seed is derived from the data seed.
std::uint64_t bench_data_seed(std::uint64_t master, std::size_t sigma_case,
                              Index replication);
std::uint64_t bench_estimate_seed(std::uint64_t data_seed);

/// Worker count from MODALKIT_THREADS, else the hardware concurrency.
unsigned bench_threads();

ReplicationRecord run_replication(const BenchConfig& config,
                                  std::size_t sigma_case, Index replication);

BenchResult run_bench(const BenchConfig& config, unsigned threads = 0);

/// Writes table.csv, replications.csv, p_ott_distribution.csv,
/// error_distribution.csv and summary.json into config.output_dir.
void write_bench(const BenchResult& result);

} // namespace modalkit
