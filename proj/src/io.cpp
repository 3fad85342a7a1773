#include "addpp/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace addpp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings everywhere
  if (!out) throw ParseError("cannot write " + path);
  return out;
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("bad number '" + std::string(text) + "' in " + context);
  return value;
}

long parse_long(std::string_view text, const std::string& context) {
  long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("bad integer '" + std::string(text) + "' in " + context);
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

EventFileData read_event_csv(const std::string& path,
                             std::optional<double> duration_flag,
                             std::optional<int> processes_flag) {
  auto in = open_in(path);
  std::optional<double> header_duration;
  std::string line;
  bool saw_header = false;
  std::vector<std::pair<int, double>> rows;
  int max_process = 0;

  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("T=");
      if (pos != std::string::npos)
        header_duration = parse_double(line.substr(pos + 2), path);
      continue;
    }
    if (!saw_header) {
      if (line != "process,timestamp")
        throw ParseError(path + ": expected header 'process,timestamp'");
      saw_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ParseError(path + ": malformed row '" + line + "'");
    const long process = parse_long(fields[0], path);
    const double t = parse_double(fields[1], path);
    if (process < 1) throw ParseError(path + ": process ids start at 1");
    rows.emplace_back(static_cast<int>(process), t);
    max_process = std::max(max_process, static_cast<int>(process));
  }
  if (!saw_header) throw ParseError(path + ": missing header 'process,timestamp'");

  EventFileData data;
  if (duration_flag) {
    data.duration = *duration_flag;
  } else if (header_duration) {
    data.duration = *header_duration;
  } else {
    throw ParseError(path + ": no duration; pass --duration or add '# T=<seconds>'");
  }
  if (!(data.duration > 0.0)) throw ParseError(path + ": duration must be positive");

  data.processes = processes_flag.value_or(std::max(max_process, 1));
  if (data.processes < 1) throw ParseError(path + ": process count must be positive");
  data.per_process.assign(data.processes, {});
  for (const auto& [process, t] : rows) {
    if (process > data.processes)
      throw ParseError(path + ": process id " + std::to_string(process) +
                       " out of range 1.." + std::to_string(data.processes));
    if (t < 0.0 || t > data.duration)
      throw ParseError(path + ": timestamp " + format_double(t) + " outside [0, T]");
    data.per_process[process - 1].push_back(t);
  }
  for (auto& stream : data.per_process) std::sort(stream.begin(), stream.end());
  return data;
}

void write_event_csv(const std::string& path, const EventFileData& data) {
  auto out = open_out(path);
  out << "# T=" << format_double(data.duration) << "\n";
  out << "process,timestamp\n";
  for (int j = 0; j < data.processes; ++j) {
    std::vector<double> sorted = data.per_process[j];
    std::sort(sorted.begin(), sorted.end());
    for (double t : sorted) out << (j + 1) << ',' << format_double(t) << "\n";
  }
}

void save_model(const ModelFile& model, const std::string& path, bool as_json) {
  if (as_json) {
    ordered_json j;
    j["schema"] = "addpp-model";
    j["schema_version"] = model.schema_version;
    j["D"] = model.processes;
    j["M"] = model.bins;
    j["T"] = model.duration;
    j["k"] = model.order;
    j["window"] = model.window;
    j["method"] = model.method;
    j["iterations"] = model.iterations;
    j["converged"] = model.converged;
    j["final_residual"] = model.final_residual;
    ordered_json bw = ordered_json::object();
    for (const auto& [mask, h] : model.bandwidth) bw[subset_key(mask)] = h;
    j["bandwidth"] = std::move(bw);
    ordered_json counts = ordered_json::object();
    for (const auto& [mask, n] : model.counts) counts[subset_key(mask)] = n;
    j["counts"] = std::move(counts);
    ordered_json pruned = ordered_json::array();
    for (const auto& s : model.pruned) pruned.push_back(state_key(s));
    j["pruned"] = std::move(pruned);
    j["psi"] = model.psi;
    ordered_json theta = ordered_json::object();
    for (const auto& [s, v] : model.theta) theta[state_key(s)] = v;
    j["theta"] = std::move(theta);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    return;
  }

  auto out = open_out(path);
  out << "addpp-model v" << model.schema_version << "\n";
  out << "D " << model.processes << "\n";
  out << "M " << model.bins << "\n";
  out << "T " << format_double(model.duration) << "\n";
  out << "k " << model.order << "\n";
  out << "window " << format_double(model.window) << "\n";
  out << "method " << model.method << "\n";
  out << "iterations " << model.iterations << "\n";
  out << "converged " << (model.converged ? 1 : 0) << "\n";
  out << "final_residual " << format_double(model.final_residual) << "\n";
  for (const auto& [mask, h] : model.bandwidth)
    out << "bandwidth " << subset_key(mask) << ' ' << format_double(h) << "\n";
  for (const auto& [mask, n] : model.counts)
    out << "count " << subset_key(mask) << ' ' << n << "\n";
  for (const auto& s : model.pruned) out << "pruned " << state_key(s) << "\n";
  out << "psi " << format_double(model.psi) << "\n";
  for (const auto& [s, v] : model.theta)
    out << "theta " << state_key(s) << ' ' << format_double(v) << "\n";
}

namespace {

ModelFile load_model_json(const std::string& path) {
  auto in = open_in(path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("schema", "") != "addpp-model")
    throw ParseError(path + ": not an addpp model file");
  ModelFile model;
  try {
    model.schema_version = j.at("schema_version").get<int>();
    model.processes = j.at("D").get<int>();
    model.bins = j.at("M").get<int>();
    model.duration = j.at("T").get<double>();
    model.order = j.at("k").get<int>();
    model.window = j.at("window").get<double>();
    model.method = j.at("method").get<std::string>();
    model.iterations = j.at("iterations").get<int>();
    model.converged = j.at("converged").get<bool>();
    model.final_residual = j.at("final_residual").get<double>();
    for (const auto& [key, value] : j.at("bandwidth").items())
      model.bandwidth[parse_subset_key(key, model.processes)] = value.get<double>();
    for (const auto& [key, value] : j.at("counts").items())
      model.counts[parse_subset_key(key, model.processes)] = value.get<std::size_t>();
    for (const auto& key : j.at("pruned"))
      model.pruned.push_back(
          parse_state_key(key.get<std::string>(), model.processes, model.bins));
    model.psi = j.at("psi").get<double>();
    for (const auto& [key, value] : j.at("theta").items())
      model.theta.emplace_back(parse_state_key(key, model.processes, model.bins),
                               value.get<double>());
  } catch (const ordered_json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model;
}

ModelFile load_model_text(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line).rfind("addpp-model v", 0) != 0)
    throw ParseError(path + ": not an addpp model file");
  ModelFile model;
  model.schema_version = static_cast<int>(parse_long(strip_cr(line).substr(13), path));

  bool have_d = false, have_m = false, have_t = false, have_k = false;
  std::vector<std::pair<std::string, std::string>> deferred_states;
  std::vector<std::array<std::string, 3>> deferred_pairs;  // kind, key, value
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    std::string a, b;
    if (tag == "D") {
      row >> a;
      model.processes = static_cast<int>(parse_long(a, path));
      have_d = true;
    } else if (tag == "M") {
      row >> a;
      model.bins = static_cast<int>(parse_long(a, path));
      have_m = true;
    } else if (tag == "T") {
      row >> a;
      model.duration = parse_double(a, path);
      have_t = true;
    } else if (tag == "k") {
      row >> a;
      model.order = static_cast<int>(parse_long(a, path));
      have_k = true;
    } else if (tag == "window") {
      row >> a;
      model.window = parse_double(a, path);
    } else if (tag == "method") {
      row >> model.method;
    } else if (tag == "iterations") {
      row >> a;
      model.iterations = static_cast<int>(parse_long(a, path));
    } else if (tag == "converged") {
      row >> a;
      model.converged = parse_long(a, path) != 0;
    } else if (tag == "final_residual") {
      row >> a;
      model.final_residual = parse_double(a, path);
    } else if (tag == "psi") {
      row >> a;
      model.psi = parse_double(a, path);
    } else if (tag == "bandwidth" || tag == "count" || tag == "theta") {
      row >> a >> b;
      deferred_pairs.push_back({tag, a, b});
    } else if (tag == "pruned") {
      row >> a;
      deferred_states.emplace_back(tag, a);
    } else {
      throw ParseError(path + ": unknown line '" + line + "'");
    }
  }
  if (!have_d || !have_m || !have_t || !have_k)
    throw ParseError(path + ": missing D/M/T/k");

  for (const auto& [kind, key, value] : deferred_pairs) {
    if (kind == "bandwidth") {
      model.bandwidth[parse_subset_key(key, model.processes)] = parse_double(value, path);
    } else if (kind == "count") {
      model.counts[parse_subset_key(key, model.processes)] =
          static_cast<std::size_t>(parse_long(value, path));
    } else {
      model.theta.emplace_back(parse_state_key(key, model.processes, model.bins),
                               parse_double(value, path));
    }
  }
  for (const auto& [kind, key] : deferred_states)
    model.pruned.push_back(parse_state_key(key, model.processes, model.bins));
  return model;
}

}  // namespace

ModelFile load_model(const std::string& path) {
  {
    auto in = open_in(path);
    char first = 0;
    in >> first;
    if (first == '{') return load_model_json(path);
  }
  return load_model_text(path);
}

SampleSpace model_space(const ModelFile& model) {
  try {
    return SampleSpace::build(model.processes, model.bins, model.duration);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

ParamDomain model_domain(const ModelFile& model, const SampleSpace& space) {
  auto domain = ParamDomain::build(space, model.order);
  if (model.pruned.empty()) return domain;
  std::vector<char> keep(domain.size(), 1);
  for (const auto& s : model.pruned) {
    const int pos = domain.position_of_space_index(space.index_of(s));
    if (pos < 0) throw ParseError("model file: pruned state outside the domain");
    keep[pos] = 0;
  }
  return domain.restricted(keep);
}

ParamVector model_params(const ModelFile& model, const ParamDomain& domain,
                         const SampleSpace& space) {
  if (model.theta.size() != static_cast<std::size_t>(domain.size()))
    throw ParseError("model file: theta entries do not cover the domain");
  ParamVector params;
  params.theta.assign(domain.size(), 0.0);
  std::vector<char> seen(domain.size(), 0);
  for (const auto& [state, value] : model.theta) {
    const int pos = domain.position_of_space_index(space.index_of(state));
    if (pos < 0) throw ParseError("model file: theta key outside the domain: " + state_key(state));
    if (seen[pos]) throw ParseError("model file: duplicate theta key " + state_key(state));
    seen[pos] = 1;
    params.theta[pos] = value;
  }
  recompute_psi(params, domain, space);
  return params;
}

void write_truth_csv(const std::string& path, const std::vector<double>& intensity) {
  auto out = open_out(path);
  out << "bin,intensity\n";
  for (std::size_t i = 0; i < intensity.size(); ++i)
    out << (i + 1) << ',' << format_double(intensity[i]) << "\n";
}

void write_intensity_csv(const std::string& path, const std::vector<double>& intensity,
                         double duration) {
  auto out = open_out(path);
  out << "bin,t_start,t_end,intensity\n";
  const int m = static_cast<int>(intensity.size());
  for (int i = 0; i < m; ++i)
    out << (i + 1) << ',' << format_double(duration * i / m) << ','
        << format_double(duration * (i + 1) / m) << ','
        << format_double(intensity[i]) << "\n";
}

std::vector<double> read_intensity_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  int bin_col = -1, value_col = -1;
  std::vector<std::pair<long, double>> rows;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (bin_col < 0) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "bin") bin_col = static_cast<int>(i);
        if (fields[i] == "intensity") value_col = static_cast<int>(i);
      }
      if (bin_col < 0 || value_col < 0)
        throw ParseError(path + ": need 'bin' and 'intensity' columns");
      continue;
    }
    if (fields.size() <= static_cast<std::size_t>(std::max(bin_col, value_col)))
      throw ParseError(path + ": malformed row '" + line + "'");
    rows.emplace_back(parse_long(fields[bin_col], path),
                      parse_double(fields[value_col], path));
  }
  if (rows.empty()) throw ParseError(path + ": no intensity rows");
  std::sort(rows.begin(), rows.end());
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long>(i + 1))
      throw ParseError(path + ": bins must cover 1..M exactly once");
    out.push_back(rows[i].second);
  }
  return out;
}

void append_result_csv(const std::string& path, const std::string& model,
                       const std::string& test, const std::string& subset,
                       const std::string& metric, double value) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ParseError("cannot write " + path);
  if (fresh) out << "model,test,subset,metric,value\n";
  out << model << ',' << test << ',' << subset << ',' << metric << ','
      << format_double(value) << "\n";
}

void write_grid_csv(const std::string& path,
                    const std::vector<std::tuple<double, int, double>>& rows) {
  auto out = open_out(path);
  out << "h,M,score\n";
  for (const auto& [h, m, score] : rows) {
    out << format_double(h) << ',' << m << ',';
    if (std::isinf(score))
      out << "inf";
    else
      out << format_double(score);
    out << "\n";
  }
}

}  // namespace addpp
