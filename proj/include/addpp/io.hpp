#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "addpp/model.hpp"
#include "addpp/poset.hpp"

namespace addpp {

// Malformed or inconsistent input file.  The CLI maps this to exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that parses back to the same double; '.' decimal,
// locale independent.
std::string format_double(double value);

struct EventFileData {
  int processes = 0;
  double duration = 0.0;
  std::vector<std::vector<double>> per_process;  // sorted
};

// CSV with header "process,timestamp" and optional "# T=<seconds>" comment.
// The duration comes from the flag when given, else the header comment.
// Process ids outside 1..D and timestamps outside [0, T] are rejected.
EventFileData read_event_csv(const std::string& path,
                             std::optional<double> duration_flag,
                             std::optional<int> processes_flag);
void write_event_csv(const std::string& path, const EventFileData& data);

// Serialized fit: everything needed to rebuild the model deterministically.
struct ModelFile {
  int schema_version = 1;
  int processes = 0;
  int bins = 0;
  double duration = 0.0;
  int order = 0;
  double window = 0.0;
  std::string method;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  std::map<std::uint32_t, double> bandwidth;
  std::map<std::uint32_t, std::size_t> counts;
  std::vector<PosetState> pruned;
  double psi = 0.0;
  std::vector<std::pair<PosetState, double>> theta;  // domain order
};

void save_model(const ModelFile& model, const std::string& path, bool as_json);
ModelFile load_model(const std::string& path);  // sniffs text vs json

SampleSpace model_space(const ModelFile& model);
ParamDomain model_domain(const ModelFile& model, const SampleSpace& space);
ParamVector model_params(const ModelFile& model, const ParamDomain& domain,
                         const SampleSpace& space);

// Ground-truth CSV: header "bin,intensity".
void write_truth_csv(const std::string& path, const std::vector<double>& intensity);
// Estimated-intensity CSV: header "bin,t_start,t_end,intensity".
void write_intensity_csv(const std::string& path, const std::vector<double>& intensity,
                         double duration);
// Reads any CSV with "bin" and "intensity" columns, returning intensities in
// bin order (both formats above qualify).
std::vector<double> read_intensity_csv(const std::string& path);

// Appends one row to a results CSV, writing the header on first use.
void append_result_csv(const std::string& path, const std::string& model,
                       const std::string& test, const std::string& subset,
                       const std::string& metric, double value);

// Grid-search table CSV: header "h,M,score".
void write_grid_csv(const std::string& path,
                    const std::vector<std::tuple<double, int, double>>& rows);

}  // namespace addpp
