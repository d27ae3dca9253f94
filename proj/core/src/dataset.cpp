#include "pwgee/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pwgee {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const void* bytes, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string t = trim(cell);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error("non-numeric cell '" + t + "' in column '" + column + "' at line " +
                std::to_string(line_no));
  }
  return value;
}

}  // namespace

LongitudinalDataset::LongitudinalDataset(std::vector<ClusterData> clusters,
                                         std::vector<std::string> covariate_names)
    : names_(std::move(covariate_names)) {
  if (clusters.empty()) throw Error("dataset must contain at least one cluster");
  p_ = clusters.front().x.cols();
  std::unordered_set<std::string> ids;
  for (const auto& c : clusters) {
    if (c.y.size() < 1) throw Error("cluster '" + c.id + "' has no observations");
    if (c.x.rows() != c.y.size()) {
      throw Error("cluster '" + c.id + "': covariate rows do not match response length");
    }
    if (c.x.cols() != p_) throw Error("cluster '" + c.id + "': covariate dimension mismatch");
    if (!ids.insert(c.id).second) throw Error("duplicate cluster id '" + c.id + "'");
    total_obs_ += c.y.size();
    max_size_ = std::max(max_size_, c.y.size());
  }
  if (!names_.empty() && static_cast<Index>(names_.size()) != p_) {
    throw Error("covariate name count does not match covariate dimension");
  }
  if (names_.empty()) {
    names_.reserve(static_cast<std::size_t>(p_));
    for (Index j = 0; j < p_; ++j) names_.push_back("x" + std::to_string(j + 1));
  }
  clusters_ = std::make_shared<const std::vector<ClusterData>>(std::move(clusters));
}

std::span<const ClusterData> LongitudinalDataset::clusters() const {
  if (!clusters_) return {};
  return {clusters_->data(), clusters_->size()};
}

LongitudinalDataset LongitudinalDataset::subset(std::span<const Index> cluster_indices) const {
  std::vector<ClusterData> out;
  out.reserve(cluster_indices.size());
  for (Index i : cluster_indices) {
    if (i < 0 || i >= n()) throw Error("cluster index out of range");
    out.push_back(cluster(i));
  }
  return LongitudinalDataset(std::move(out), names_);
}

LongitudinalDataset LongitudinalDataset::select_columns(std::span<const Index> columns) const {
  std::vector<ClusterData> out;
  out.reserve(static_cast<std::size_t>(n()));
  std::vector<std::string> names;
  for (Index j : columns) {
    if (j < 0 || j >= p_) throw Error("covariate index out of range");
    names.push_back(names_[static_cast<std::size_t>(j)]);
  }
  for (const auto& c : clusters()) {
    ClusterData d{c.id, c.y, Matrix(c.x.rows(), static_cast<Index>(columns.size()))};
    for (std::size_t k = 0; k < columns.size(); ++k) d.x.col(static_cast<Index>(k)) = c.x.col(columns[k]);
    out.push_back(std::move(d));
  }
  return LongitudinalDataset(std::move(out), std::move(names));
}

std::uint64_t LongitudinalDataset::content_hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& c : clusters()) {
    fnv_mix(h, c.id.data(), c.id.size());
    const Index shape[2] = {c.x.rows(), c.x.cols()};
    fnv_mix(h, shape, sizeof(shape));
    fnv_mix(h, c.y.data(), sizeof(double) * static_cast<std::size_t>(c.y.size()));
    fnv_mix(h, c.x.data(), sizeof(double) * static_cast<std::size_t>(c.x.size()));
  }
  return h;
}

LongitudinalDataset read_long_csv(std::istream& in, const CsvColumns& columns) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw Error("empty file: no header row");
  for (auto& h : header) h = trim(h);

  auto find_col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ycol = find_col(columns.response);
  const std::size_t idcol = find_col(columns.cluster);
  std::vector<std::size_t> xcols;
  std::vector<std::string> names;
  if (columns.covariates.empty()) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (k == ycol || k == idcol) continue;
      xcols.push_back(k);
      names.push_back(header[k]);
    }
  } else {
    for (const auto& name : columns.covariates) {
      xcols.push_back(find_col(name));
      names.push_back(name);
    }
  }
  if (xcols.empty()) throw Error("no covariate columns");

  // Rows are grouped by cluster id in order of first appearance.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::vector<double>>> rows;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                  " fields, header has " + std::to_string(header.size()));
    }
    const std::string id = trim(fields[idcol]);
    std::vector<double> row;
    row.reserve(xcols.size() + 1);
    row.push_back(parse_number(fields[ycol], line_no, header[ycol]));
    for (std::size_t k : xcols) row.push_back(parse_number(fields[k], line_no, header[k]));
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(std::move(row));
    ++n_rows;
  }
  if (n_rows == 0) throw Error("empty file: no data rows");

  std::vector<ClusterData> clusters;
  clusters.reserve(order.size());
  const auto p = static_cast<Index>(xcols.size());
  for (const auto& id : order) {
    const auto& r = rows.at(id);
    const auto m = static_cast<Index>(r.size());
    ClusterData c{id, Vector(m), Matrix(m, p)};
    for (Index k = 0; k < m; ++k) {
      const auto& row = r[static_cast<std::size_t>(k)];
      c.y(k) = row[0];
      for (Index j = 0; j < p; ++j) c.x(k, j) = row[static_cast<std::size_t>(j + 1)];
    }
    clusters.push_back(std::move(c));
  }
  return LongitudinalDataset(std::move(clusters), std::move(names));
}

LongitudinalDataset load_long_csv(const std::string& path, const CsvColumns& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_long_csv(in, columns);
}

void write_long_csv(std::ostream& out, const LongitudinalDataset& data,
                    const std::string& response_name, const std::string& cluster_name) {
  out << cluster_name << ',' << response_name;
  for (const auto& name : data.covariate_names()) out << ',' << name;
  out << '\n';
  std::ostringstream cell;
  cell << std::setprecision(17);
  auto num = [&](double v) -> std::string {
    cell.str({});
    cell << v;
    return cell.str();
  };
  for (const auto& c : data.clusters()) {
    for (Index k = 0; k < c.size(); ++k) {
      out << c.id << ',' << num(c.y(k));
      for (Index j = 0; j < c.x.cols(); ++j) out << ',' << num(c.x(k, j));
      out << '\n';
    }
  }
}

Standardized standardize_covariates(const LongitudinalDataset& data, std::span<const Index> keep) {
  const Index p = data.p();
  const Index total = data.total_observations();
  if (p < 1) throw Error("no covariates to standardize");
  if (total < 2) throw Error("need at least two observations to standardize");
  std::vector<bool> skip(static_cast<std::size_t>(p), false);
  for (Index j : keep) {
    if (j < 0 || j >= p) throw Error("standardize: keep index out of range");
    skip[static_cast<std::size_t>(j)] = true;
  }

  Vector means = Vector::Zero(p);
  for (const auto& c : data.clusters()) means += c.x.colwise().sum().transpose();
  means /= static_cast<double>(total);
  Vector ss = Vector::Zero(p);
  for (const auto& c : data.clusters()) {
    ss += (c.x.rowwise() - means.transpose()).colwise().squaredNorm().transpose();
  }
  Vector sds = (ss / static_cast<double>(total - 1)).cwiseSqrt();

  for (Index j = 0; j < p; ++j) {
    if (skip[static_cast<std::size_t>(j)]) {
      means(j) = 0.0;
      sds(j) = 1.0;
    } else if (!(sds(j) > 0.0)) {
      throw Error("zero-variance column '" + data.covariate_names()[static_cast<std::size_t>(j)] +
                  "'");
    }
  }

  std::vector<ClusterData> out;
  out.reserve(static_cast<std::size_t>(data.n()));
  for (const auto& c : data.clusters()) {
    ClusterData d{c.id, c.y, c.x};
    for (Index j = 0; j < p; ++j) {
      if (skip[static_cast<std::size_t>(j)]) continue;
      d.x.col(j) = (d.x.col(j).array() - means(j)) / sds(j);
    }
    out.push_back(std::move(d));
  }
  return {LongitudinalDataset(std::move(out), data.covariate_names()), std::move(means),
          std::move(sds)};
}

}  // namespace pwgee
