#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "modalkit/baseline.hpp"
#include "modalkit/density.hpp"
#include "modalkit/mle1d.hpp"
#include "modalkit/model.hpp"
#include "modalkit/perturb.hpp"

namespace modalkit::io
{

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// %.17g rendering; parses back to the same double.
std::string format_double(double x);

/// Strict decimal parse of a whole field; nothing when the text is not a
/// finite number.
std::optional<double> parse_double(const std::string& text);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& j);

// Samples: CSV `k,re,im` plus a sidecar with the same stem and a .json
// extension holding {n, delta, sigma}.
fs::path sidecar_path(const fs::path& csv);
std::string samples_csv(const SignalSamples& s);
Json samples_meta(const SignalSamples& s);
void write_samples(const fs::path& csv, const SignalSamples& s);
/// Parses the CSV and, when present, its sidecar. Errors name the line.
SignalSamples read_samples(const fs::path& csv);
SignalSamples parse_samples_csv(const std::string& text,
                                const std::string& source = "<input>");

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

// Model: {p, modes:[{re_c, im_c, re_xi, im_xi}]}
Json model_to_json(const ModalModel& m);
ModalModel model_from_json(const Json& j);
/// Accepts either the complex form above or
/// {real_modes:[{amplitude, decay, frequency, phase}]}.
ModalModel any_model_from_json(const Json& j);

Json hyperparameters_to_json(const Hyperparameters& hp);
/// Overrides the fields present in `j`; unknown keys are rejected.
void apply_hyperparameters(const Json& j, Hyperparameters& hp);

Json report_to_json(const EstimationReport& r);

std::string density_csv(const DensityGrid& grid);
Json regions_to_json(const RegionSet& regions);

struct DensityTable
{
    std::vector<double> x, y, h;
};
DensityTable parse_density_csv(const std::string& text,
                               const std::string& source = "<input>");

std::string curve_csv(const mle1d::DensityCurve& curve);
/// Reads an `x,p` file back into grid and values.
mle1d::DensityCurve parse_curve_csv(const std::string& text,
                                    const std::string& source = "<input>");

Json grid_search_to_json(const GridSearchResult& r);
Json error_record_to_json(const ErrorRecord& e);

} // namespace modalkit::io
