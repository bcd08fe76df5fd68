#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsisel/error.hpp"

namespace wsisel {

enum class Domain { source, target };

enum class TableFormat { csv, binary };

const char* to_string(Domain d);
const char* to_string(TableFormat f);

/// Shortest decimal representation that round-trips the exact double.
/// Used for every real value the library prints to CSV.
std::string format_double(double value);

/// One feature vector extracted from a single patch of a WSI.
struct PatchRecord {
  std::string patch_id;
  std::string group_id;               // owning WSI
  std::optional<int> label;           // class index, absent for unlabeled
  std::vector<double> features;
};

struct ClassHistogram {
  std::vector<std::int64_t> counts;   // length = num_classes

  std::int64_t total() const;
};

/// Immutable collection of patch feature vectors with WSI (group)
/// membership. Groups iterate in first-appearance order; all downstream
/// ranking and reporting respects that order for tie-breaking.
class FeatureTable {
 public:
  /// Validates every invariant: feature lengths equal `dim`, all values
  /// finite, labels < num_classes, unique patch ids, and source tables
  /// fully labeled. Throws IngestError / LabelError on violation.
  FeatureTable(std::vector<PatchRecord> records, int dim, int num_classes,
               Domain domain);

  const std::vector<PatchRecord>& records() const { return records_; }
  const PatchRecord& record(std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  int dim() const { return dim_; }
  int num_classes() const { return num_classes_; }
  Domain domain() const { return domain_; }

  /// Group ids in first-appearance order.
  const std::vector<std::string>& group_order() const { return group_order_; }
  std::size_t group_count() const { return group_order_.size(); }
  bool has_group(const std::string& group_id) const;
  /// Record positions of one group, in table order. Throws LookupError.
  const std::vector<std::size_t>& group_rows(const std::string& group_id) const;

 private:
  std::vector<PatchRecord> records_;
  int dim_ = 0;
  int num_classes_ = 0;
  Domain domain_ = Domain::target;
  std::vector<std::string> group_order_;
  std::unordered_map<std::string, std::vector<std::size_t>> group_index_;
};

/// Load a feature table from disk.
///
/// CSV: one file with directive lines, a header row
/// `patch_id,wsi_id,label,f0,...,f{D-1}`, and one row per patch. The
/// class count is declared up front with a `# classes=C` directive, never
/// inferred from the labels present.
///
/// Binary: `path` is a JSON manifest
/// `{"n","d","classes","dtype":"f64le","payload","ids"}` where payload is
/// row-major little-endian float64 of exactly n*d*8 bytes and ids is a
/// CSV with columns patch_id,wsi_id,label.
FeatureTable load_table(const std::string& path, TableFormat format,
                        Domain domain = Domain::target);

/// Inverse of load_table. For binary, `path` is the manifest path and the
/// payload/ids files are written next to it as `<stem>.f64le` and
/// `<stem>.ids.csv`.
void write_table(const FeatureTable& table, const std::string& path,
                 TableFormat format);

/// Per-class counts over the labeled records. Throws LabelError when the
/// table holds no labeled record at all.
ClassHistogram class_histogram(const FeatureTable& table);

/// Extract one WSI as a standalone table, preserving record order.
FeatureTable split_group(const FeatureTable& table, const std::string& group_id);

/// Restrict the table to the given groups (first-appearance order of the
/// original table is kept). Every id must exist.
FeatureTable subset_groups(const FeatureTable& table,
                           const std::vector<std::string>& group_ids);

}  // namespace wsisel
