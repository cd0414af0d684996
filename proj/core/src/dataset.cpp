// Copyright 2026 The embdistill Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embdistill/dataset.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embdistill/error.hpp"
#include "embdistill/io.hpp"

namespace embdistill {
namespace fs = std::filesystem;

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error(ErrorKind::kManifest, "split '" + name + "' is not one of train, dev, test");
}

fs::path DatasetManifest::resolve(const ManifestRow& row) const {
  const fs::path p(row.clip_path);
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

Error line_error(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "manifest line " << line << ": " << what;
  return Error(ErrorKind::kManifest, os.str());
}

std::string get_string(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw line_error(line, std::string("missing field '") + key + "'");
  if (!j[key].is_string()) throw line_error(line, std::string("field '") + key + "' must be a string");
  return j[key].get<std::string>();
}

void parse_header(const nlohmann::json& j, DatasetManifest& m, std::size_t line) {
  if (j.contains("corpus")) {
    m.corpus = get_string(j, "corpus", line);
    return;
  }
  const nlohmann::json& t = j.at("task");
  if (!t.is_object()) throw line_error(line, "'task' must be an object");
  TaskSpec spec;
  spec.name = get_string(t, "name", line);
  try {
    spec.metric = selection_metric_from_string(t.value("metric", std::string("accuracy")));
  } catch (const Error& e) {
    throw line_error(line, e.what());
  }
  if (t.contains("classes")) {
    if (!t["classes"].is_array()) throw line_error(line, "'classes' must be an array");
    for (const auto& c : t["classes"]) {
      if (!c.is_string()) throw line_error(line, "class names must be strings");
      m.classes.push_back(c.get<std::string>());
    }
  }
  if (t.contains("num_classes")) {
    if (!t["num_classes"].is_number_unsigned()) {
      throw line_error(line, "'num_classes' must be a positive integer");
    }
    spec.num_classes = t["num_classes"].get<std::size_t>();
  } else {
    spec.num_classes = m.classes.size();
  }
  if (spec.num_classes < 2) throw line_error(line, "a task needs at least two classes");
  if (!m.classes.empty() && m.classes.size() != spec.num_classes) {
    throw line_error(line, "'classes' length disagrees with 'num_classes'");
  }
  if (m.classes.empty()) {
    for (std::size_t k = 0; k < spec.num_classes; ++k) m.classes.push_back(std::to_string(k));
  }
  if (std::set<std::string>(m.classes.begin(), m.classes.end()).size() != m.classes.size()) {
    throw line_error(line, "duplicate class names");
  }
  if (spec.metric == SelectionMetric::kEer && spec.num_classes != 2) {
    throw line_error(line, "metric 'eer' requires a binary task");
  }
  m.task = spec;
}

int parse_label(const nlohmann::json& v, const DatasetManifest& m, std::size_t line) {
  if (v.is_number_integer()) {
    const auto k = v.get<long long>();
    if (k < 0 || static_cast<std::size_t>(k) >= m.classes.size()) {
      throw line_error(line, "label " + std::to_string(k) + " outside the declared classes");
    }
    return static_cast<int>(k);
  }
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    const auto it = std::find(m.classes.begin(), m.classes.end(), name);
    if (it == m.classes.end()) throw line_error(line, "unknown label '" + name + "'");
    return static_cast<int>(it - m.classes.begin());
  }
  throw line_error(line, "label must be a class name or index");
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text, const fs::path& base_dir,
                               bool check_audio) {
  DatasetManifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::set<std::string> ids;
  bool seen_row = false;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw line_error(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw line_error(line, "expected a JSON object");
    if (j.contains("task") || j.contains("corpus")) {
      if (seen_row || m.task || !m.corpus.empty()) {
        throw line_error(line, "the header must be the first line");
      }
      parse_header(j, m, line);
      continue;
    }
    seen_row = true;
    ManifestRow row;
    row.clip_path = get_string(j, "clip_path", line);
    row.clip_id = j.contains("clip_id") ? get_string(j, "clip_id", line)
                                        : fs::path(row.clip_path).stem().string();
    row.split = Split::kTrain;
    if (j.contains("split")) {
      try {
        row.split = split_from_string(get_string(j, "split", line));
      } catch (const Error& e) {
        throw line_error(line, std::string("field 'split': ") + e.what());
      }
    } else if (m.task) {
      throw line_error(line, "missing field 'split'");
    }
    if (j.contains("source_tag")) row.source_tag = get_string(j, "source_tag", line);
    if (m.task) {
      if (!j.contains("label")) throw line_error(line, "missing field 'label'");
      row.label = parse_label(j["label"], m, line);
    }
    if (!ids.insert(row.clip_id).second) {
      throw line_error(line, "duplicate clip_id '" + row.clip_id + "'");
    }
    if (check_audio) {
      try {
        (void)read_wav_info(m.resolve(row));
      } catch (const Error& e) {
        throw line_error(line, std::string("unreadable audio: ") + e.what());
      }
    }
    m.rows.push_back(std::move(row));
  }
  if (m.rows.empty()) throw Error(ErrorKind::kManifest, "manifest has no clips");
  if (m.task) {
    for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
      const bool any = std::any_of(m.rows.begin(), m.rows.end(),
                                   [s](const ManifestRow& r) { return r.split == s; });
      if (!any) {
        throw Error(ErrorKind::kManifest,
                    "task '" + m.task->name + "' has no '" + to_string(s) + "' clips");
      }
    }
  }
  return m;
}

DatasetManifest ingest_manifest(const fs::path& path, bool check_audio) {
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "manifest '" + path.string() + "' not found");
  return parse_manifest(read_text(path), path.parent_path(), check_audio);
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out;
  if (m.task) {
    nlohmann::json t = {{"name", m.task->name},
                        {"metric", to_string(m.task->metric)},
                        {"num_classes", m.task->num_classes},
                        {"classes", m.classes}};
    out += nlohmann::json{{"task", t}}.dump() + "\n";
  } else if (!m.corpus.empty()) {
    out += nlohmann::json{{"corpus", m.corpus}}.dump() + "\n";
  }
  for (const auto& r : m.rows) {
    nlohmann::json j = {{"clip_id", r.clip_id}, {"clip_path", r.clip_path},
                        {"split", to_string(r.split)}, {"source_tag", r.source_tag}};
    if (m.task) j["label"] = m.classes.at(static_cast<std::size_t>(r.label));
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<const LoadedClip*> TaskData::split(Split s) const {
  std::vector<const LoadedClip*> out;
  for (const auto& c : clips) {
    if (c.split == s) out.push_back(&c);
  }
  return out;
}

TaskData load_task(const DatasetManifest& m, std::initializer_list<Split> splits,
                   int expected_rate) {
  if (!m.task) throw Error(ErrorKind::kManifest, "manifest carries no task header");
  TaskData d;
  d.task = *m.task;
  d.classes = m.classes;
  for (const auto& r : m.rows) {
    if (std::find(splits.begin(), splits.end(), r.split) == splits.end()) continue;
    d.clips.push_back({r.clip_id, read_wav(m.resolve(r), expected_rate), r.label, r.split,
                       r.source_tag});
  }
  return d;
}

std::vector<LoadedClip> load_clips(const DatasetManifest& m, int expected_rate) {
  std::vector<LoadedClip> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) {
    out.push_back({r.clip_id, read_wav(m.resolve(r), expected_rate), r.label, r.split,
                   r.source_tag});
  }
  return out;
}

}  // namespace embdistill
