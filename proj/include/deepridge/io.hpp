#pragma once

// File formats.
//
// Model (JSON):
//   { "version": 1, "dims": [d0, ..., dL],
//     "layers": [ { "V": [[..],..], "W": [[..],..], "b": [..], "C": [[..],..], "c0": [..] }, ... ] }
//   Matrices are row-major nested lists. Doubles are written in shortest
//   round-trip form, so save/load is bit-exact.
//
// Dataset (CSV): header x1,...,xd,y1,...,yD followed by one row per sample.
//
// Config (JSON): loss, regularizer {kind, lambda}, widths, hidden_dims
//   (optional), epochs, step_size, seed, init_scale, prune_eps, rebalance_every.

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepridge/network.hpp"
#include "deepridge/trainer.hpp"

namespace deepridge {

inline constexpr int kModelFormatVersion = 1;

/// Shortest decimal form that parses back to the same double (at most 17
/// significant digits).
inline std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

inline double as_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field + ": non-finite value");
  return x;
}

inline Vector read_vector(const json& j, std::size_t expected, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + ": expected an array");
  if (j.size() != expected) {
    throw ValidationError(field + ": has " + std::to_string(j.size()) + " entries, expected " +
                          std::to_string(expected));
  }
  Vector v;
  v.reserve(expected);
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_real(j[i], field + "[" + std::to_string(i) + "]"));
  return v;
}

inline Matrix read_matrix(const json& j, std::size_t rows, std::size_t cols, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + ": expected a list of rows");
  if (j.size() != rows) {
    throw ValidationError(field + ": has " + std::to_string(j.size()) + " rows, expected " +
                          std::to_string(rows) + " (matrix must be " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ")");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = read_vector(j[r], cols, field + "[" + std::to_string(r) + "]");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

inline std::size_t as_count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ValidationError(field + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& cell : out) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_real(const std::string& cell, const std::string& where) {
  double x = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, x);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(x)) {
    throw ValidationError(where + ": '" + cell + "' is not a finite number");
  }
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const DeepNet& net) {
  using nlohmann::json;
  net.validate();
  json j;
  j["version"] = kModelFormatVersion;
  j["dims"] = net.dims();
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json l;
    l["V"] = detail::matrix_to_json(layer.V);
    l["W"] = detail::matrix_to_json(layer.W);
    l["b"] = layer.b;
    l["C"] = detail::matrix_to_json(layer.C);
    l["c0"] = layer.c0;
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

inline DeepNet model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model: top level must be an object");
  if (!j.contains("version")) throw ValidationError("model: missing field 'version'");
  if (j["version"] != kModelFormatVersion) {
    throw ValidationError("model: unsupported version " + j["version"].dump());
  }
  for (const char* key : {"dims", "layers"}) {
    if (!j.contains(key)) throw ValidationError(std::string("model: missing field '") + key + "'");
  }
  const auto& jd = j["dims"];
  const auto& jl = j["layers"];
  if (!jd.is_array()) throw ValidationError("model: 'dims' must be an array");
  if (!jl.is_array()) throw ValidationError("model: 'layers' must be an array");
  if (jl.empty()) throw ValidationError("model: 'layers' is empty (need at least one layer)");
  if (jd.size() != jl.size() + 1) {
    throw ValidationError("model: 'dims' has " + std::to_string(jd.size()) + " entries for " +
                          std::to_string(jl.size()) + " layers");
  }
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < jd.size(); ++i) dims.push_back(detail::as_count(jd[i], "dims[" + std::to_string(i) + "]"));

  DeepNet net;
  for (std::size_t l = 0; l < jl.size(); ++l) {
    const std::string prefix = "layers[" + std::to_string(l) + "]";
    const auto& layer = jl[l];
    if (!layer.is_object()) throw ValidationError(prefix + ": expected an object");
    for (const char* key : {"V", "W", "b", "C", "c0"}) {
      if (!layer.contains(key)) throw ValidationError(prefix + ": missing field '" + key + "'");
    }
    if (!layer["b"].is_array()) throw ValidationError(prefix + ".b: expected an array");
    const std::size_t in = dims[l], out = dims[l + 1], K = layer["b"].size();
    BottleneckLayer bl;
    bl.b = detail::read_vector(layer["b"], K, prefix + ".b");
    bl.W = detail::read_matrix(layer["W"], K, in, prefix + ".W");
    bl.V = detail::read_matrix(layer["V"], out, K, prefix + ".V");
    bl.C = detail::read_matrix(layer["C"], out, in, prefix + ".C");
    bl.c0 = detail::read_vector(layer["c0"], out, prefix + ".c0");
    net.layers.push_back(std::move(bl));
  }
  net.validate();
  return net;
}

inline std::string dump_model(const DeepNet& net) { return model_to_json(net).dump(2) + "\n"; }

inline DeepNet parse_model(const std::string& text, const std::string& source = "model") {
  try {
    return model_from_json(detail::parse_json(text, source));
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source, 0) == 0) throw;
    throw ValidationError(source + ": " + msg);
  }
}

inline void save_model(const DeepNet& net, const std::string& path) {
  detail::write_file(path, dump_model(net));
}

inline DeepNet load_model(const std::string& path) {
  return parse_model(detail::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

inline Dataset parse_dataset(const std::string& text, const std::string& source = "dataset") {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = detail::split(line, ',');
    break;
  }
  if (header.empty()) throw ValidationError(source + ": empty file (no header)");

  std::size_t d = 0, D = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const char kind = name.empty() ? '\0' : name.front();
    if (kind == 'x' && D == 0) {
      ++d;
    } else if (kind == 'y') {
      ++D;
    } else {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": bad header column '" + name +
                            "' (expected x1..xd then y1..yD)");
    }
  }
  if (d == 0 || D == 0) throw ValidationError(source + ": header needs at least one x and one y column");

  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != d + D) {
      throw ValidationError(where + ": row has " + std::to_string(cells.size()) +
                            " cells but header has " + std::to_string(d + D));
    }
    Vector x(d), y(D);
    for (std::size_t i = 0; i < d; ++i) x[i] = detail::parse_real(cells[i], where);
    for (std::size_t i = 0; i < D; ++i) y[i] = detail::parse_real(cells[d + i], where);
    data.inputs.push_back(std::move(x));
    data.targets.push_back(std::move(y));
  }
  if (data.size() == 0) throw ValidationError(source + ": no data rows");
  return data;
}

inline std::string dump_dataset(const Dataset& data) {
  data.validate();
  std::string out;
  for (std::size_t i = 0; i < data.input_dim(); ++i) out += (i ? ",x" : "x") + std::to_string(i + 1);
  for (std::size_t i = 0; i < data.target_dim(); ++i) out += ",y" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t n = 0; n < data.size(); ++n) {
    bool first = true;
    for (const auto* vec : {&data.inputs[n], &data.targets[n]}) {
      for (double v : *vec) {
        if (!first) out += ',';
        out += format_real(v);
        first = false;
      }
    }
    out += '\n';
  }
  return out;
}

inline Dataset load_dataset(const std::string& path) {
  return parse_dataset(detail::read_file(path), path);
}

inline void save_dataset(const Dataset& data, const std::string& path) {
  detail::write_file(path, dump_dataset(data));
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

inline TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  TrainConfig c;
  static const char* kKnown[] = {"loss",     "regularizer", "widths",    "hidden_dims",    "epochs",
                                 "step_size", "seed",        "init_scale", "prune_eps", "rebalance_every"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; }) ==
        std::end(kKnown)) {
      throw ValidationError("config: unknown field '" + key + "'");
    }
  }
  if (j.contains("loss")) {
    if (j["loss"] != "squared") throw ValidationError("config.loss: only 'squared' is supported");
  }
  if (!j.contains("regularizer")) throw ValidationError("config: missing field 'regularizer'");
  const auto& reg = j["regularizer"];
  if (!reg.is_object() || !reg.contains("kind") || !reg["kind"].is_string()) {
    throw ValidationError("config.regularizer: expected {\"kind\": <name>, \"lambda\": <number>}");
  }
  c.regularizer.kind = parse_regularizer_kind(reg["kind"].get<std::string>());
  c.regularizer.lambda = reg.contains("lambda") ? detail::as_real(reg["lambda"], "config.regularizer.lambda") : 0.0;

  if (!j.contains("widths") || !j["widths"].is_array()) throw ValidationError("config: 'widths' must be an array");
  for (std::size_t i = 0; i < j["widths"].size(); ++i) {
    c.widths.push_back(detail::as_count(j["widths"][i], "config.widths[" + std::to_string(i) + "]"));
  }
  if (j.contains("hidden_dims")) {
    if (!j["hidden_dims"].is_array()) throw ValidationError("config: 'hidden_dims' must be an array");
    for (std::size_t i = 0; i < j["hidden_dims"].size(); ++i) {
      c.hidden_dims.push_back(detail::as_count(j["hidden_dims"][i], "config.hidden_dims[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("epochs")) c.epochs = detail::as_count(j["epochs"], "config.epochs");
  if (j.contains("step_size")) c.step_size = detail::as_real(j["step_size"], "config.step_size");
  if (j.contains("seed")) c.seed = detail::as_count(j["seed"], "config.seed");
  if (j.contains("init_scale")) c.init_scale = detail::as_real(j["init_scale"], "config.init_scale");
  if (j.contains("prune_eps")) c.prune_eps = detail::as_real(j["prune_eps"], "config.prune_eps");
  if (j.contains("rebalance_every")) c.rebalance_every = detail::as_count(j["rebalance_every"], "config.rebalance_every");
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["loss"] = "squared";
  j["regularizer"] = {{"kind", std::string(to_string(c.regularizer.kind))}, {"lambda", c.regularizer.lambda}};
  j["widths"] = c.widths;
  if (!c.hidden_dims.empty()) j["hidden_dims"] = c.hidden_dims;
  j["epochs"] = c.epochs;
  j["step_size"] = c.step_size;
  j["seed"] = c.seed;
  j["init_scale"] = c.init_scale;
  j["prune_eps"] = c.prune_eps;
  j["rebalance_every"] = c.rebalance_every;
  return j;
}

inline TrainConfig load_config(const std::string& path) {
  try {
    return config_from_json(detail::parse_json(detail::read_file(path), path));
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ValidationError(path + ": " + msg);
  }
}

}  // namespace deepridge
