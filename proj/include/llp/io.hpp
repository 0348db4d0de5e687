#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llp/core.hpp"
#include "llp/trainer.hpp"

namespace llp {

/// Shortest text that parses back to the same double. "nan"/"inf"/"-inf"
/// for the non-finite values.
std::string format_double(double value);

// Datasets. CSV: header f0,...,f{D-1},label. JSONL: one
// {"features": [...], "label": k} object per line. The class count is
// max(label) + 1, raised to at least `min_classes`.
LabeledDataset read_dataset_csv(std::istream& in, int min_classes = 2);
LabeledDataset read_dataset_jsonl(std::istream& in, int min_classes = 2);
/// Picks the reader from the extension (.jsonl / .json -> JSONL, else CSV).
LabeledDataset load_dataset(const std::filesystem::path& path, int min_classes = 2);
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
void write_dataset_jsonl(std::ostream& out, const LabeledDataset& data);
void save_dataset(const std::filesystem::path& path, const LabeledDataset& data);

nlohmann::ordered_json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& doc);

/// Applies one `key = value` setting to `config`. Unknown keys throw InvalidConfig.
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment; blank lines ignored.
TrainConfig read_config(std::istream& in, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
};

nlohmann::ordered_json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// `epoch,train_loss,val_loss,seconds`. The seconds column is left empty
/// unless `include_timing`, which keeps the file reproducible byte for byte.
void write_history_csv(std::ostream& out, const TrainHistory& history, bool include_timing);

/// `value,seed,w_p,w_r,w_f1`
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace llp
