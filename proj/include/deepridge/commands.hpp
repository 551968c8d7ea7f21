#pragma once

// Command implementations behind the `deepridge` executable. Each returns a
// process exit code: 0 success, 1 validation failure (bad input, violated
// precondition), 2 verification failure (a checked property did not hold).
//
// Output is either `key: value` lines or CSV with a header row.

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "deepridge/io.hpp"
#include "deepridge/network.hpp"
#include "deepridge/norms.hpp"
#include "deepridge/radon.hpp"
#include "deepridge/rescale.hpp"
#include "deepridge/trainer.hpp"

namespace deepridge {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitVerification = 2 };

namespace detail {

inline std::string join_counts(const std::vector<std::size_t>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

inline void kv(std::ostream& out, const std::string& key, double value) {
  out << key << ": " << format_real(value) << '\n';
}

inline void kv(std::ostream& out, const std::string& key, const std::string& value) {
  out << key << ": " << value << '\n';
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Collapsed-net file: { "version": 1, "kind": "standard", "A": [{rows, cols, data: [[..]]}, ...] }
// ---------------------------------------------------------------------------

inline std::string dump_standard(const StandardNet& net) {
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["kind"] = "standard";
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& a : net.A) {
    nlohmann::json m;
    m["rows"] = a.rows();
    m["cols"] = a.cols();
    m["data"] = detail::matrix_to_json(a);
    mats.push_back(std::move(m));
  }
  j["A"] = std::move(mats);
  return j.dump(2) + "\n";
}

inline StandardNet parse_standard(const std::string& text, const std::string& source = "standard") {
  const auto j = detail::parse_json(text, source);
  if (!j.is_object() || j.value("kind", "") != "standard" || !j.contains("A") || !j["A"].is_array()) {
    throw ValidationError(source + ": not a collapsed standard-net file");
  }
  StandardNet net;
  for (std::size_t i = 0; i < j["A"].size(); ++i) {
    const auto& m = j["A"][i];
    const std::string field = source + ": A[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("rows") || !m.contains("cols") || !m.contains("data")) {
      throw ValidationError(field + ": expected {rows, cols, data}");
    }
    net.A.push_back(detail::read_matrix(m["data"], detail::as_count(m["rows"], field + ".rows"),
                                        detail::as_count(m["cols"], field + ".cols"), field));
  }
  return net;
}

// ---------------------------------------------------------------------------
// norms
// ---------------------------------------------------------------------------

/// Every parameter-space quantity for a model, one `key: value` per line.
inline void write_norm_table(const DeepNet& net, std::ostream& out) {
  net.validate();
  detail::kv(out, "dims", detail::join_counts(net.dims(), ','));
  detail::kv(out, "widths", detail::join_counts(net.widths(), ','));
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    const std::string p = "layer" + std::to_string(l + 1) + ".";
    detail::kv(out, p + "path_sum", layer_path_sum(layer));
    detail::kv(out, p + "boundary", layer_boundary_term(layer));
    detail::kv(out, p + "skip_l1", layer_skip_l1(layer));
    detail::kv(out, p + "rbv2_norm", rbv2_norm_vector(layer));
  }
  if (net.depth() == 1 && net.out_dim() == 1) {
    detail::kv(out, "rtv2", rtv2_shallow(net.layers.front()));
    detail::kv(out, "rbv2_norm_scalar", rbv2_norm_scalar(net.layers.front()));
  }
  detail::kv(out, "deep_compositional_norm", deep_compositional_norm(net));
  detail::kv(out, "lipschitz_bound", lipschitz_bound(net));
  for (auto kind : kAllRegularizerKinds) detail::kv(out, std::string(to_string(kind)), regularizer_core(net, kind));
  detail::kv(out, "mixed_path_lower_bound", mixed_path_lower_bound(net));
  if (is_bias_skip_free(net) && net.out_dim() == 1) {
    detail::kv(out, "classic_path_norm", classic_path_norm(collapse_to_standard(net)));
  }
}

inline int cmd_norms(const std::string& model_path, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    write_norm_table(load_model(model_path), out);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// balance / collapse
// ---------------------------------------------------------------------------

inline int cmd_balance(const std::string& in, const std::string& out_path, std::ostream& out,
                       std::ostream& err) {
  return detail::guarded(err, [&] {
    const DeepNet net = load_model(in);
    const DeepNet balanced = balance_net(net);
    save_model(balanced, out_path);
    detail::kv(out, "sum_of_squares_before", sum_of_squares(net));
    detail::kv(out, "sum_of_squares_after", sum_of_squares(balanced));
    detail::kv(out, "sum_of_path", sum_of_path(balanced));
    return kExitOk;
  });
}

inline int cmd_collapse(const std::string& in, const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    const DeepNet net = load_model(in);
    const StandardNet std_net = collapse_to_standard(net);
    detail::write_file(out_path, dump_standard(std_net));
    for (std::size_t l = 0; l < std_net.A.size(); ++l) {
      const auto& a = std_net.A[l];
      detail::kv(out, "A" + std::to_string(l) + ".shape", std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
      detail::kv(out, "A" + std::to_string(l) + ".rank", std::to_string(numerical_rank(a)));
      detail::kv(out, "A" + std::to_string(l) + ".rank_bound", std::to_string(collapsed_rank_bound(net, l)));
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// CSV of per-row outputs, then a blank line and `loss: <value>`.
inline int cmd_eval(const std::string& model_path, const std::string& data_path, std::ostream& out,
                    std::ostream& err) {
  return detail::guarded(err, [&] {
    const DeepNet net = load_model(model_path);
    const Dataset data = load_dataset(data_path);
    data.validate();
    if (data.input_dim() != net.in_dim() || data.target_dim() != net.out_dim()) {
      throw ValidationError("dataset is " + std::to_string(data.input_dim()) + "->" +
                            std::to_string(data.target_dim()) + " but model is " +
                            std::to_string(net.in_dim()) + "->" + std::to_string(net.out_dim()));
    }
    out << "row";
    for (std::size_t m = 0; m < net.out_dim(); ++m) out << ",f" << m + 1;
    out << '\n';
    for (std::size_t n = 0; n < data.size(); ++n) {
      out << n + 1;
      for (double v : forward(net, data.inputs[n])) out << ',' << format_real(v);
      out << '\n';
    }
    out << '\n';
    detail::kv(out, "loss", loss_value(net, data));
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// train / sweep
// ---------------------------------------------------------------------------

inline void write_train_report(const TrainReport& r, std::ostream& out) {
  detail::kv(out, "epochs", std::to_string(r.objectives.size() - 1));
  detail::kv(out, "initial_objective", r.objectives.front());
  detail::kv(out, "final_objective", r.objectives.back());
  detail::kv(out, "final_data_loss", r.final_data_loss);
  detail::kv(out, "final_regularizer", r.final_regularizer);
  detail::kv(out, "path_core", r.path_core);
  detail::kv(out, "weight_decay_core", r.weight_decay_core);
  detail::kv(out, "active_neurons", detail::join_counts(r.active_neurons, ','));
}

struct TrainCommand {
  std::string data_path;
  std::string config_path;
  std::string out_path;
  std::string trace_path;  // optional: per-epoch objective CSV
  std::optional<std::uint64_t> seed_override;
};

inline int cmd_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Dataset data = load_dataset(cmd.data_path);
    TrainConfig config = load_config(cmd.config_path);
    if (cmd.seed_override) config.seed = *cmd.seed_override;
    const auto [net, report] = train(data, config);
    save_model(net, cmd.out_path);
    if (!cmd.trace_path.empty()) {
      std::string trace = "epoch,objective\n";
      for (std::size_t e = 0; e < report.objectives.size(); ++e) {
        trace += std::to_string(e) + "," + format_real(report.objectives[e]) + "\n";
      }
      detail::write_file(cmd.trace_path, trace);
    }
    write_train_report(report, out);
    return kExitOk;
  });
}

inline void write_sweep_table(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "lambda,final_data_loss,final_regularizer,path_core,weight_decay_core,active_total,active_per_layer\n";
  for (const auto& r : rows) {
    out << format_real(r.lambda) << ',' << format_real(r.final_data_loss) << ','
        << format_real(r.final_regularizer) << ',' << format_real(r.path_core) << ','
        << format_real(r.weight_decay_core) << ',' << r.total_active() << ','
        << detail::join_counts(r.active_neurons, ';') << '\n';
  }
}

inline std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> lambdas;
  for (const auto& cell : detail::split(text, ',')) {
    const double v = detail::parse_real(cell, "--lambdas");
    if (v < 0.0) throw ValidationError("--lambdas: values must be nonnegative");
    lambdas.push_back(v);
  }
  if (lambdas.empty()) throw ValidationError("--lambdas: empty list");
  return lambdas;
}

struct SweepCommand {
  std::string data_path;
  std::string config_path;
  std::string lambdas;
  std::optional<std::uint64_t> seed_override;
};

inline int cmd_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Dataset data = load_dataset(cmd.data_path);
    TrainConfig config = load_config(cmd.config_path);
    if (cmd.seed_override) config.seed = *cmd.seed_override;
    write_sweep_table(sparsity_sweep(data, config, parse_lambda_list(cmd.lambdas)), out);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// radon-verify
// ---------------------------------------------------------------------------

struct RadonCheck {
  double max_reconstruction_error = 0.0;
  double max_evenness_error = 0.0;
  std::size_t annihilation_failures = 0;
  std::size_t support_failures = 0;
  double tv_minus_rtv2 = 0.0;

  bool passed(double tol) const {
    return max_reconstruction_error < tol && max_evenness_error <= 1e-12 &&
           annihilation_failures == 0 && support_failures == 0 && tv_minus_rtv2 <= 1e-12;
  }
};

/// Reconstruction identity at `samples` random points in [−2, 2]^d, plus the
/// kernel's annihilation, evenness and compact-support properties at random
/// (x, w) pairs. The model must be a single scalar-output layer.
inline RadonCheck verify_radon(const DeepNet& net, std::size_t samples, std::uint64_t seed) {
  net.validate();
  if (net.depth() != 1 || net.out_dim() != 1) {
    throw ValidationError("radon-verify needs a shallow scalar model (1 layer, 1 output); got " +
                          std::to_string(net.depth()) + " layers with " + std::to_string(net.out_dim()) +
                          " outputs");
  }
  const auto& layer = net.layers.front();
  const std::size_t d = layer.in_dim();
  const auto [measure, boundary] = extract_measure(layer);

  RadonCheck check;
  check.tv_minus_rtv2 = std::abs(measure_total_variation(measure) - rtv2_shallow(layer));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(d), w(d), neg_w(d), e(d, 0.0), zero(d, 0.0);

  const auto random_unit = [&](Vector& v) {
    double n = 0.0;
    while (n == 0.0) {
      for (double& c : v) c = gauss(rng);
      n = l2_norm(v);
    }
    for (double& c : v) c /= n;
  };

  for (std::size_t s = 0; s < samples; ++s) {
    for (double& c : x) c = coord(rng);
    const double err = std::abs(reconstruct(measure, boundary, x) - forward(net, x).front());
    check.max_reconstruction_error = std::max(check.max_reconstruction_error, err);

    random_unit(w);
    for (std::size_t i = 0; i < d; ++i) neg_w[i] = -w[i];
    const double b = coord(rng);
    check.max_evenness_error =
        std::max(check.max_evenness_error, std::abs(kernel_g_phi(x, w, b) - kernel_g_phi(x, neg_w, -b)));

    if (kernel_g_phi(zero, w, b) != 0.0) ++check.annihilation_failures;
    for (std::size_t k = 0; k < d; ++k) {
      e[k] = 1.0;
      if (kernel_g_phi(e, w, b) != 0.0) ++check.annihilation_failures;
      e[k] = 0.0;
    }

    const auto [lo, hi] = support_bounds(x, w);
    const double scale = 1.0 + l1_norm(x);
    for (int j = 1; j <= 10; ++j) {
      const double off = 0.5 * j;
      // Beyond the support the kernel is a cancellation of O(scale) terms.
      const double slack = 1e-12 * scale * (1.0 + std::abs(hi) + std::abs(lo) + off);
      if (std::abs(kernel_g_phi(x, w, hi + off)) > slack) ++check.support_failures;
      if (std::abs(kernel_g_phi(x, w, lo - off)) > slack) ++check.support_failures;
    }
  }
  return check;
}

struct RadonVerifyCommand {
  std::string model_path;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

inline int cmd_radon_verify(const RadonVerifyCommand& cmd, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RadonCheck c = verify_radon(load_model(cmd.model_path), cmd.samples, cmd.seed);
    detail::kv(out, "samples", std::to_string(cmd.samples));
    detail::kv(out, "max_reconstruction_error", c.max_reconstruction_error);
    detail::kv(out, "max_evenness_error", c.max_evenness_error);
    detail::kv(out, "annihilation_failures", std::to_string(c.annihilation_failures));
    detail::kv(out, "support_failures", std::to_string(c.support_failures));
    detail::kv(out, "tv_minus_rtv2", c.tv_minus_rtv2);
    const bool ok = c.passed(cmd.tol);
    detail::kv(out, "result", ok ? "pass" : "fail");
    return ok ? kExitOk : kExitVerification;
  });
}

// ---------------------------------------------------------------------------
// lipschitz
// ---------------------------------------------------------------------------

struct LipschitzCommand {
  std::string model_path;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  double radius = 1.0;
};

inline int cmd_lipschitz(const LipschitzCommand& cmd, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const DeepNet net = load_model(cmd.model_path);
    const double bound = lipschitz_bound(net);
    const double empirical = empirical_lipschitz(net, cmd.samples, cmd.seed, cmd.radius);
    detail::kv(out, "lipschitz_bound", bound);
    detail::kv(out, "empirical_lipschitz", empirical);
    const bool ok = empirical <= bound + 1e-9;
    detail::kv(out, "bound_holds", ok ? "true" : "false");
    return ok ? kExitOk : kExitVerification;
  });
}

}  // namespace deepridge
