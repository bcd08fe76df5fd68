#include "wsisel/dataset.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <utility>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "binary table format assumes a little-endian host");

namespace wsisel {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* to_string(Domain d) {
  return d == Domain::source ? "source" : "target";
}

const char* to_string(TableFormat f) {
  return f == TableFormat::csv ? "csv" : "binary";
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

std::int64_t ClassHistogram::total() const {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

FeatureTable::FeatureTable(std::vector<PatchRecord> records, int dim,
                           int num_classes, Domain domain)
    : records_(std::move(records)),
      dim_(dim),
      num_classes_(num_classes),
      domain_(domain) {
  if (dim_ <= 0) throw IngestError("feature dimension must be positive");
  if (num_classes_ <= 0) throw IngestError("class count must be positive");

  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const PatchRecord& r = records_[i];
    if (r.features.size() != static_cast<std::size_t>(dim_)) {
      throw IngestError("record " + std::to_string(i) + " (" + r.patch_id +
                        "): expected " + std::to_string(dim_) +
                        " features, got " + std::to_string(r.features.size()));
    }
    for (std::size_t j = 0; j < r.features.size(); ++j) {
      if (!std::isfinite(r.features[j])) {
        throw IngestError("record " + std::to_string(i) + " (" + r.patch_id +
                          "): non-finite value in feature f" + std::to_string(j));
      }
    }
    if (r.label) {
      if (*r.label < 0 || *r.label >= num_classes_) {
        throw LabelError("record " + std::to_string(i) + " (" + r.patch_id +
                         "): label " + std::to_string(*r.label) +
                         " out of range for " + std::to_string(num_classes_) +
                         " classes");
      }
    } else if (domain_ == Domain::source) {
      throw LabelError("record " + std::to_string(i) + " (" + r.patch_id +
                       "): source table requires a label on every record");
    }
    if (!seen_ids.insert(r.patch_id).second) {
      throw IngestError("record " + std::to_string(i) +
                        ": duplicate patch_id '" + r.patch_id + "'");
    }
    auto [it, inserted] = group_index_.try_emplace(r.group_id);
    if (inserted) group_order_.push_back(r.group_id);
    it->second.push_back(i);
  }
}

bool FeatureTable::has_group(const std::string& group_id) const {
  return group_index_.count(group_id) != 0;
}

const std::vector<std::size_t>& FeatureTable::group_rows(
    const std::string& group_id) const {
  auto it = group_index_.find(group_id);
  if (it == group_index_.end()) {
    throw LookupError("unknown group_id '" + group_id + "'");
  }
  return it->second;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw IngestError(where + ": cannot parse real value '" + text + "'");
  }
  return value;
}

long parse_int(const std::string& text, const std::string& where) {
  long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw IngestError(where + ": cannot parse integer '" + text + "'");
  }
  return value;
}

std::optional<int> parse_label(const std::string& text, const std::string& where) {
  if (text.empty()) return std::nullopt;
  return static_cast<int>(parse_int(text, where));
}

struct CsvHeader {
  int dim = 0;
};

CsvHeader parse_feature_header(const std::string& line, const std::string& path) {
  const auto fields = split_csv_line(line);
  if (fields.size() < 4 || fields[0] != "patch_id" || fields[1] != "wsi_id" ||
      fields[2] != "label") {
    throw IngestError(path + ": header must be patch_id,wsi_id,label,f0,...");
  }
  for (std::size_t j = 3; j < fields.size(); ++j) {
    if (fields[j] != "f" + std::to_string(j - 3)) {
      throw IngestError(path + ": header feature column " + std::to_string(j) +
                        " must be f" + std::to_string(j - 3));
    }
  }
  return CsvHeader{static_cast<int>(fields.size() - 3)};
}

FeatureTable load_csv(const std::string& path, Domain domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  int classes = -1;
  bool have_header = false;
  CsvHeader header;
  std::vector<PatchRecord> records;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      // Directive lines precede the header, e.g. "# classes=3".
      std::string body = line.substr(1);
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      std::string value = body.substr(eq + 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      if (key == "classes") classes = static_cast<int>(parse_int(value, where));
      continue;
    }
    if (!have_header) {
      header = parse_feature_header(line, where);
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(header.dim) + 3) {
      throw IngestError(where + ": expected " + std::to_string(header.dim + 3) +
                        " fields, got " + std::to_string(fields.size()));
    }
    PatchRecord rec;
    rec.patch_id = fields[0];
    rec.group_id = fields[1];
    rec.label = parse_label(fields[2], where + " label");
    rec.features.resize(header.dim);
    for (int j = 0; j < header.dim; ++j) {
      rec.features[j] = parse_double(fields[3 + j], where + " f" + std::to_string(j));
    }
    records.push_back(std::move(rec));
  }
  if (!have_header) throw IngestError(path + ": missing header row");
  if (classes <= 0) {
    throw IngestError(path + ": missing '# classes=C' directive (class count "
                      "is declared, never inferred)");
  }
  return FeatureTable(std::move(records), header.dim, classes, domain);
}

FeatureTable load_binary(const std::string& path, Domain domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestError(path + ": invalid manifest JSON: " + e.what());
  }
  for (const char* key : {"n", "d", "classes", "dtype", "payload", "ids"}) {
    if (!manifest.contains(key)) {
      throw IngestError(path + ": manifest missing key '" + std::string(key) + "'");
    }
  }
  if (manifest["dtype"].get<std::string>() != "f64le") {
    throw IngestError(path + ": unsupported dtype '" +
                      manifest["dtype"].get<std::string>() + "'");
  }
  const std::int64_t n = manifest["n"].get<std::int64_t>();
  const int d = manifest["d"].get<int>();
  const int classes = manifest["classes"].get<int>();
  if (n < 0 || d <= 0) throw IngestError(path + ": invalid n/d in manifest");

  const fs::path base = fs::path(path).parent_path();
  const fs::path payload_path = base / manifest["payload"].get<std::string>();
  const fs::path ids_path = base / manifest["ids"].get<std::string>();

  std::ifstream payload(payload_path, std::ios::binary);
  if (!payload) throw IngestError("cannot open payload '" + payload_path.string() + "'");
  payload.seekg(0, std::ios::end);
  const std::int64_t bytes = payload.tellg();
  const std::int64_t expected = n * static_cast<std::int64_t>(d) * 8;
  if (bytes != expected) {
    throw IngestError(payload_path.string() + ": payload is " +
                      std::to_string(bytes) + " bytes, expected " +
                      std::to_string(expected));
  }
  payload.seekg(0, std::ios::beg);

  std::ifstream ids(ids_path, std::ios::binary);
  if (!ids) throw IngestError("cannot open ids file '" + ids_path.string() + "'");

  std::vector<PatchRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(ids, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = ids_path.string() + ":" + std::to_string(line_no);
    if (!have_header) {
      if (line != "patch_id,wsi_id,label") {
        throw IngestError(where + ": ids header must be patch_id,wsi_id,label");
      }
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw IngestError(where + ": expected 3 fields, got " +
                        std::to_string(fields.size()));
    }
    PatchRecord rec;
    rec.patch_id = fields[0];
    rec.group_id = fields[1];
    rec.label = parse_label(fields[2], where + " label");
    rec.features.resize(d);
    payload.read(reinterpret_cast<char*>(rec.features.data()),
                 static_cast<std::streamsize>(d) * 8);
    if (!payload) throw IngestError(where + ": payload ended early");
    records.push_back(std::move(rec));
  }
  if (records.size() != static_cast<std::size_t>(n)) {
    throw IngestError(ids_path.string() + ": ids file has " +
                      std::to_string(records.size()) + " rows, manifest says " +
                      std::to_string(n));
  }
  return FeatureTable(std::move(records), d, classes, domain);
}

void write_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << "# classes=" << table.num_classes() << "\n";
  out << "patch_id,wsi_id,label";
  for (int j = 0; j < table.dim(); ++j) out << ",f" << j;
  out << "\n";
  for (const PatchRecord& r : table.records()) {
    out << r.patch_id << ',' << r.group_id << ',';
    if (r.label) out << *r.label;
    for (double v : r.features) out << ',' << format_double(v);
    out << "\n";
  }
  if (!out) throw IngestError("failed writing '" + path + "'");
}

void write_binary(const FeatureTable& table, const std::string& path) {
  const fs::path manifest_path(path);
  const std::string stem = manifest_path.stem().string();
  const std::string payload_name = stem + ".f64le";
  const std::string ids_name = stem + ".ids.csv";
  const fs::path base = manifest_path.parent_path();

  {
    std::ofstream payload(base / payload_name, std::ios::binary);
    if (!payload) throw IngestError("cannot write payload next to '" + path + "'");
    for (const PatchRecord& r : table.records()) {
      payload.write(reinterpret_cast<const char*>(r.features.data()),
                    static_cast<std::streamsize>(r.features.size()) * 8);
    }
    if (!payload) throw IngestError("failed writing payload next to '" + path + "'");
  }
  {
    std::ofstream ids(base / ids_name, std::ios::binary);
    if (!ids) throw IngestError("cannot write ids file next to '" + path + "'");
    ids << "patch_id,wsi_id,label\n";
    for (const PatchRecord& r : table.records()) {
      ids << r.patch_id << ',' << r.group_id << ',';
      if (r.label) ids << *r.label;
      ids << "\n";
    }
  }
  json manifest;
  manifest["n"] = table.size();
  manifest["d"] = table.dim();
  manifest["classes"] = table.num_classes();
  manifest["dtype"] = "f64le";
  manifest["payload"] = payload_name;
  manifest["ids"] = ids_name;
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << manifest.dump(2) << "\n";
}

}  // namespace

FeatureTable load_table(const std::string& path, TableFormat format, Domain domain) {
  if (format == TableFormat::csv) return load_csv(path, domain);
  return load_binary(path, domain);
}

void write_table(const FeatureTable& table, const std::string& path,
                 TableFormat format) {
  if (format == TableFormat::csv) {
    write_csv(table, path);
  } else {
    write_binary(table, path);
  }
}

ClassHistogram class_histogram(const FeatureTable& table) {
  ClassHistogram hist;
  hist.counts.assign(table.num_classes(), 0);
  std::int64_t labeled = 0;
  for (const PatchRecord& r : table.records()) {
    if (r.label) {
      ++hist.counts[*r.label];
      ++labeled;
    }
  }
  if (labeled == 0) throw LabelError("class_histogram: table has no labeled records");
  return hist;
}

FeatureTable split_group(const FeatureTable& table, const std::string& group_id) {
  const auto& rows = table.group_rows(group_id);  // throws LookupError
  std::vector<PatchRecord> records;
  records.reserve(rows.size());
  for (std::size_t i : rows) records.push_back(table.record(i));
  return FeatureTable(std::move(records), table.dim(), table.num_classes(),
                      table.domain());
}

FeatureTable subset_groups(const FeatureTable& table,
                           const std::vector<std::string>& group_ids) {
  std::unordered_set<std::string> wanted;
  for (const std::string& id : group_ids) {
    table.group_rows(id);  // existence check
    wanted.insert(id);
  }
  std::vector<PatchRecord> records;
  for (const PatchRecord& r : table.records()) {
    if (wanted.count(r.group_id)) records.push_back(r);
  }
  return FeatureTable(std::move(records), table.dim(), table.num_classes(),
                      table.domain());
}

}  // namespace wsisel
