#pragma once

// JSON and CSV output for reports and network checkpoints.
//
// Doubles are always written with 17 significant digits so values round-trip
// exactly; non-finite values become null.

#include <nlohmann/json.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/network.hpp"
#include "rnewton/solver.hpp"

namespace rnewton {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Streaming JSON writer with two-space indentation.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& os) : os_(os) {}

  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(std::string_view k) {
    separate();
    quoted(k);
    os_ << ": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_double(v)); }
  template <std::integral I>
    requires(!std::same_as<I, bool>)
  JsonWriter& value(I v) {
    return raw(std::to_string(v));
  }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(std::string_view s) {
    separate();
    quoted(s);
    return *this;
  }
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& null() { return raw("null"); }

  /// Array of numbers on a single line.
  template <class Range>
  JsonWriter& numbers(const Range& r) {
    separate();
    os_ << '[';
    bool first = true;
    for (const auto& v : r) {
      if (!first) os_ << ", ";
      first = false;
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
        os_ << format_double(v);
      } else {
        os_ << v;
      }
    }
    os_ << ']';
    return *this;
  }

  JsonWriter& vector(const DenseVector& v) {
    return numbers(std::vector<double>(v.data(), v.data() + v.size()));
  }

  void finish() { os_ << '\n'; }

 private:
  JsonWriter& open(char c) {
    separate();
    os_ << c;
    first_.push_back(true);
    return *this;
  }
  JsonWriter& close(char c) {
    const bool empty = first_.back();
    first_.pop_back();
    if (!empty) newline();
    os_ << c;
    return *this;
  }
  JsonWriter& raw(std::string_view s) {
    separate();
    os_ << s;
    return *this;
  }
  void separate() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (first_.empty()) return;
    if (!first_.back()) os_ << ',';
    first_.back() = false;
    newline();
  }
  void newline() {
    os_ << '\n';
    for (std::size_t i = 0; i < first_.size(); ++i) os_ << "  ";
  }
  void quoted(std::string_view s) {
    os_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': os_ << "\\\""; break;
        case '\\': os_ << "\\\\"; break;
        case '\n': os_ << "\\n"; break;
        case '\t': os_ << "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            os_ << buf;
          } else {
            os_ << c;
          }
      }
    }
    os_ << '"';
  }

  std::ostream& os_;
  std::vector<bool> first_;
  bool pending_key_ = false;
};

/// Writes the report body as key/value pairs into an already open object.
inline void write_report_fields(JsonWriter& w, const SolveReport& r) {
  w.key("converged").value(r.converged);
  w.key("termination").value(to_string(r.termination));
  w.key("iterations").value(static_cast<std::uint64_t>(r.iterations));
  w.key("seed").value(r.seed);
  w.key("final_subset_norm").value(r.final_subset_norm);
  w.key("final_full_norm").value(r.final_full_norm);
  w.key("final_condition").value(r.final_condition);
  w.key("fallback_steps").value(static_cast<std::uint64_t>(r.fallback_steps));
  w.key("redraws").value(static_cast<std::uint64_t>(r.redraws));
  w.key("final_theta").vector(r.final_theta);
  w.key("residual_history").begin_array();
  for (const auto& h : r.residual_history) {
    w.numbers(std::vector<double>{static_cast<double>(h.iteration), h.subset_norm, h.full_norm, h.condition});
  }
  w.end_array();
  w.key("condition_history").numbers(r.condition_history);
  w.key("subset_log").begin_array();
  for (const auto& s : r.subset_log) w.numbers(s);
  w.end_array();
}

/// iteration, subset_norm, full_norm, condition.
inline void write_history_csv(std::ostream& os, const SolveReport& r) {
  os << "iteration,subset_norm,full_norm,condition\n";
  for (const auto& h : r.residual_history) {
    os << h.iteration << "," << format_double(h.subset_norm) << "," << format_double(h.full_norm) << ","
       << format_double(h.condition) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Checkpoints: {layer_widths, activation, branches, theta}.

inline void write_checkpoint(std::ostream& os, const NetworkParams& net) {
  JsonWriter w(os);
  w.begin_object();
  w.key("layer_widths").numbers(net.shape.layer_widths);
  w.key("activation").value(to_string(net.shape.activation));
  w.key("branches").value(static_cast<std::uint64_t>(net.shape.branches));
  w.key("theta").vector(net.theta);
  w.end_object();
  w.finish();
}

inline NetworkParams read_checkpoint(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    NetworkShape shape;
    shape.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
    shape.activation = activation_from_string(j.at("activation").get<std::string>());
    shape.branches = j.value("branches", std::size_t{1});
    const auto theta = j.at("theta").get<std::vector<double>>();
    return NetworkParams(shape, Eigen::Map<const DenseVector>(theta.data(), static_cast<Eigen::Index>(theta.size())));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint is missing a field: ") + e.what());
  }
}

}  // namespace rnewton
