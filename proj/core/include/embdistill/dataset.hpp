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

#ifndef EMBDISTILL_DATASET_HPP_
#define EMBDISTILL_DATASET_HPP_

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "embdistill/frontend.hpp"
#include "embdistill/probes.hpp"

namespace embdistill {

enum class Split { kTrain, kDev, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string& name);

struct ManifestRow {
  std::string clip_id;
  // Relative paths resolve against the manifest's directory.
  std::string clip_path;
  int label = -1;  // -1 for unlabelled corpus rows
  Split split = Split::kTrain;
  std::string source_tag;
};

// JSON Lines: an optional header object {"task": {...}} or {"corpus": name}
// followed by one object per clip.
struct DatasetManifest {
  std::optional<TaskSpec> task;
  std::vector<std::string> classes;
  std::string corpus;
  std::vector<ManifestRow> rows;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestRow& row) const;
};

// Validates enums, labels, clip-id uniqueness and (when check_audio) that
// every clip parses as a WAV header. Task manifests must populate all three
// splits. Throws Error(kManifest) naming the offending line.
DatasetManifest ingest_manifest(const std::filesystem::path& path, bool check_audio = true);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               bool check_audio = true);
std::string manifest_to_jsonl(const DatasetManifest& m);

struct LoadedClip {
  std::string clip_id;
  Waveform waveform;
  int label = -1;
  Split split = Split::kTrain;
  std::string source_tag;
};

struct TaskData {
  TaskSpec task;
  std::vector<std::string> classes;
  std::vector<LoadedClip> clips;

  std::vector<const LoadedClip*> split(Split s) const;
};

// Reads only the requested splits' audio.
TaskData load_task(const DatasetManifest& m, std::initializer_list<Split> splits,
                   int expected_rate);
std::vector<LoadedClip> load_clips(const DatasetManifest& m, int expected_rate);

}  // namespace embdistill

#endif  // EMBDISTILL_DATASET_HPP_
