#pragma once

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "detect.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "masking.hpp"
#include "model.hpp"
#include "training.hpp"

namespace umgad {

struct DetectConfig {
  std::uint64_t score_seed = 0;
  unsigned threads = 1;
};

struct Config {
  ModelConfig model;
  TrainConfig train;
  LossWeights loss;
  MaskConfig mask;
  RwrConfig rwr;
  DetectConfig detect;

  ScoreOptions score_options() const { return {detect.score_seed, detect.threads}; }

  void validate() const {
    model.validate();
    train.validate();
    loss.validate();
    mask.validate();
    if (detect.threads == 0) throw ConfigError("detect.threads must be >= 1");
  }
};

namespace config_detail {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + text + "'");
  } else {
    T v{};
    const char* b = text.data();
    const char* e = b + text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) throw ConfigError(key + ": cannot parse '" + text + "'");
    return v;
  }
}

template <class T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_floating_point_v<T>) return io_detail::format_double(v);
  else return std::to_string(v);
}

struct Field {
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define UMGAD_FIELD(sec, name)                                                          \
  {#sec "." #name,                                                                      \
   Field{[](Config& c, const std::string& v) {                                          \
           c.sec.name = parse_value<std::remove_cvref_t<decltype(c.sec.name)>>(#sec "." #name, v); \
         },                                                                             \
         [](const Config& c) { return show(c.sec.name); }}}

inline const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      UMGAD_FIELD(model, hidden_dim),
      UMGAD_FIELD(model, enc_layers),
      UMGAD_FIELD(model, dec_layers),
      UMGAD_FIELD(model, eta),
      {"model.cl_denominator",
       Field{[](Config& c, const std::string& v) {
               if (v == "negatives") c.model.cl_denominator = ClDenominator::Negatives;
               else if (v == "infonce") c.model.cl_denominator = ClDenominator::InfoNce;
               else throw ConfigError("model.cl_denominator: expected negatives|infonce, got '" + v + "'");
             },
             [](const Config& c) {
               return std::string(c.model.cl_denominator == ClDenominator::Negatives ? "negatives" : "infonce");
             }}},
      {"model.aug_target",
       Field{[](Config& c, const std::string& v) {
               if (v == "original") c.model.aug_target = AugTarget::Original;
               else if (v == "donor") c.model.aug_target = AugTarget::Donor;
               else throw ConfigError("model.aug_target: expected original|donor, got '" + v + "'");
             },
             [](const Config& c) {
               return std::string(c.model.aug_target == AugTarget::Original ? "original" : "donor");
             }}},
      UMGAD_FIELD(train, epochs),
      UMGAD_FIELD(train, lr),
      UMGAD_FIELD(train, weight_decay),
      UMGAD_FIELD(train, dropout),
      UMGAD_FIELD(train, seed),
      UMGAD_FIELD(train, replan_every),
      {"train.no_mask", Field{[](Config& c, const std::string& v) { c.train.ablation.no_mask = parse_value<bool>("train.no_mask", v); },
                              [](const Config& c) { return show(c.train.ablation.no_mask); }}},
      {"train.no_original", Field{[](Config& c, const std::string& v) { c.train.ablation.no_original = parse_value<bool>("train.no_original", v); },
                                  [](const Config& c) { return show(c.train.ablation.no_original); }}},
      {"train.no_attr_aug", Field{[](Config& c, const std::string& v) { c.train.ablation.no_attr_aug = parse_value<bool>("train.no_attr_aug", v); },
                                  [](const Config& c) { return show(c.train.ablation.no_attr_aug); }}},
      {"train.no_sub_aug", Field{[](Config& c, const std::string& v) { c.train.ablation.no_sub_aug = parse_value<bool>("train.no_sub_aug", v); },
                                 [](const Config& c) { return show(c.train.ablation.no_sub_aug); }}},
      {"train.no_dcl", Field{[](Config& c, const std::string& v) { c.train.ablation.no_dcl = parse_value<bool>("train.no_dcl", v); },
                             [](const Config& c) { return show(c.train.ablation.no_dcl); }}},
      UMGAD_FIELD(loss, alpha),
      UMGAD_FIELD(loss, beta),
      UMGAD_FIELD(loss, lambda),
      UMGAD_FIELD(loss, mu),
      UMGAD_FIELD(loss, theta),
      UMGAD_FIELD(loss, epsilon),
      UMGAD_FIELD(mask, mask_ratio),
      UMGAD_FIELD(mask, repeats),
      UMGAD_FIELD(mask, n_neg),
      UMGAD_FIELD(rwr, restart_prob),
      UMGAD_FIELD(rwr, subgraph_size),
      UMGAD_FIELD(rwr, max_steps),
      UMGAD_FIELD(detect, score_seed),
      UMGAD_FIELD(detect, threads),
  };
  return table;
}

#undef UMGAD_FIELD

inline const Field& lookup(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace config_detail

/// Sets "section.key" to a textual value; unknown keys are rejected.
inline void set_option(Config& cfg, const std::string& key, const std::string& value) {
  config_detail::lookup(key).set(cfg, value);
}

inline std::string get_option(const Config& cfg, const std::string& key) {
  return config_detail::lookup(key).get(cfg);
}

/// Applies a `key=value` override as given on the command line.
inline void apply_override(Config& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_option(cfg, std::string(io_detail::trim(assignment.substr(0, eq))), std::string(io_detail::trim(assignment.substr(eq + 1))));
}

inline void read_config(std::istream& in, Config& cfg, const std::string& where = "config") {
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s(io_detail::trim(line));
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(where, lineno, "unterminated section header");
      section = std::string(io_detail::trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where, lineno, "expected key = value");
    if (section.empty()) throw ParseError(where, lineno, "key outside of a section");
    try {
      set_option(cfg, section + "." + std::string(io_detail::trim(s.substr(0, eq))), std::string(io_detail::trim(s.substr(eq + 1))));
    } catch (const ConfigError& e) {
      throw ParseError(where, lineno, e.what());
    }
  }
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  Config cfg;
  read_config(in, cfg, path);
  return cfg;
}

/// Writes every key in INI form; the output parses back to the same config.
inline void write_config(std::ostream& out, const Config& cfg) {
  std::string current;
  for (const auto& [key, field] : config_detail::fields()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != current) {
      if (!current.empty()) out << '\n';
      out << '[' << sec << "]\n";
      current = sec;
    }
    out << key.substr(dot + 1) << " = " << field.get(cfg) << '\n';
  }
}

inline std::string to_string(const Config& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace umgad
