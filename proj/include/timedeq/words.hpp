#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace timedeq {

enum class LangMode { TL, UTL, WTL, WUTL };

inline std::string lang_mode_name(LangMode m) {
  switch (m) {
    case LangMode::TL: return "tl";
    case LangMode::UTL: return "utl";
    case LangMode::WTL: return "wtl";
    case LangMode::WUTL: return "wutl";
  }
  return "?";
}

inline LangMode lang_mode_by_key(const std::string& key) {
  if (key == "tl") return LangMode::TL;
  if (key == "utl") return LangMode::UTL;
  if (key == "wtl") return LangMode::WTL;
  if (key == "wutl") return LangMode::WUTL;
  throw std::invalid_argument("unknown language mode '" + key + "'");
}

struct LangBound {
  int max_len = 3;       // action letters per word
  int64_t max_time = 4;  // total duration
};

// A timed word t0 s1 t1 ... sn tn: durations.size() == labels.size() + 1.
// Untimed words keep labels only (durations empty).
struct TimedWord {
  std::vector<int64_t> durations;
  std::vector<int> labels;  // 0 = tau

  bool timed() const { return !durations.empty(); }
  int64_t total_time() const {
    int64_t t = 0;
    for (int64_t d : durations) t += d;
    return t;
  }
  friend bool operator==(const TimedWord& a, const TimedWord& b) {
    return a.durations == b.durations && a.labels == b.labels;
  }
  friend bool operator<(const TimedWord& a, const TimedWord& b) {
    if (a.labels.size() != b.labels.size()) return a.labels.size() < b.labels.size();
    if (a.durations != b.durations) return a.durations < b.durations;
    return a.labels < b.labels;
  }
};

template <class LabelName>
std::string format_word(const TimedWord& w, LabelName&& name) {
  std::string out;
  if (!w.timed()) {
    if (w.labels.empty()) return "(empty)";
    for (size_t i = 0; i < w.labels.size(); ++i) {
      if (i) out += "\xc2\xb7";  // interpunct
      out += name(w.labels[i]);
    }
    return out;
  }
  for (size_t i = 0; i < w.durations.size(); ++i) {
    if (i) out += "\xc2\xb7";
    out += std::to_string(w.durations[i]);
    if (i < w.labels.size()) {
      out += "\xc2\xb7";
      out += name(w.labels[i]);
    }
  }
  return out;
}

}  // namespace timedeq
