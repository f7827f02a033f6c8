#include "panoscan/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "panoscan/errors.hpp"

namespace panoscan {
namespace {

namespace pt = boost::property_tree;

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

template <class T>
T convert(const std::string& key, const std::string& raw) {
  const std::string s = unquote(raw);
  if constexpr (std::is_same_v<T, std::string>) {
    return s;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (s == "true") {
      return true;
    }
    if (s == "false") {
      return false;
    }
    throw ConfigError(key + ": expected true or false, got \"" + s + "\"");
  } else {
    std::istringstream in(s);
    T value{};
    in >> value;
    if (in.fail() || !(in >> std::ws).eof()) {
      throw ConfigError(key + ": cannot parse \"" + s + "\"");
    }
    return value;
  }
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"trajectory", {"beta_h", "beta_v", "overlap", "size_l"}},
      {"segmenter", {"kind", "endpoint", "timeout_s", "retries"}},
      {"pipeline", {"threshold", "threads", "cache_dir", "keep_frame_masks"}},
  };
  return keys;
}

}  // namespace

std::string_view to_string(SegmenterKind kind) noexcept {
  return kind == SegmenterKind::oracle ? "oracle" : "external";
}

SegmenterKind segmenter_kind_from_string(std::string_view text) {
  if (text == "oracle") {
    return SegmenterKind::oracle;
  }
  if (text == "external") {
    return SegmenterKind::external;
  }
  throw ConfigError("unknown segmenter \"" + std::string(text) + "\" (expected oracle or external)");
}

void PipelineConfig::validate() const {
  trajectory.validate();
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must lie in (0, 1]");
  }
  if (threads < 0) {
    throw ConfigError("threads must be non-negative");
  }
  if (segmenter == SegmenterKind::external && endpoint.base_url.empty()) {
    throw ConfigError("the external segmenter needs an endpoint");
  }
  if (!(endpoint.timeout_s > 0.0) || endpoint.retries < 0) {
    throw ConfigError("segmenter timeout must be positive and retries non-negative");
  }
}

PipelineConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) {
      throw ConfigError("config: unknown section or top-level key \"" + section + "\"");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ConfigError("config: unknown key \"" + section + "." + key + "\"");
      }
    }
  }

  PipelineConfig cfg;
  auto read = [&]<class T>(const std::string& path, T& target) {
    if (const auto v = tree.get_optional<std::string>(path)) {
      target = convert<T>(path, *v);
    }
  };
  read("trajectory.beta_h", cfg.trajectory.beta_h);
  read("trajectory.beta_v", cfg.trajectory.beta_v);
  read("trajectory.overlap", cfg.trajectory.overlap);
  read("trajectory.size_l", cfg.trajectory.size_l);
  std::string kind(to_string(cfg.segmenter));
  read("segmenter.kind", kind);
  cfg.segmenter = segmenter_kind_from_string(kind);
  read("segmenter.endpoint", cfg.endpoint.base_url);
  read("segmenter.timeout_s", cfg.endpoint.timeout_s);
  read("segmenter.retries", cfg.endpoint.retries);
  read("pipeline.threshold", cfg.threshold);
  read("pipeline.threads", cfg.threads);
  std::string cache_dir;
  read("pipeline.cache_dir", cache_dir);
  cfg.cache_dir = cache_dir;
  read("pipeline.keep_frame_masks", cfg.keep_frame_masks);
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace panoscan
