#include "did/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace did {

bool is_panel(Setting s) { return s == Setting::PA1 || s == Setting::PA2; }

bool compatible(Setting s, Variant v) {
  switch (v) {
    case Variant::Efficient: return true;
    case Variant::Star2:
    case Variant::Star3: return s == Setting::CS1;
    case Variant::PrimeCS2: return s == Setting::CS2;
    case Variant::PrimeCS4: return s == Setting::CS4;
    case Variant::IpwBenchmark: return s == Setting::CS4;
    case Variant::DiffMeans: return s == Setting::CS5 || s == Setting::PA2;
  }
  return false;
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::CS1: return "cs1";
    case Setting::CS2: return "cs2";
    case Setting::CS3: return "cs3";
    case Setting::CS4: return "cs4";
    case Setting::CS5: return "cs5";
    case Setting::PA1: return "pa1";
    case Setting::PA2: return "pa2";
  }
  return "?";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Efficient: return "efficient";
    case Variant::Star2: return "star2";
    case Variant::Star3: return "star3";
    case Variant::PrimeCS2: return "prime-cs2";
    case Variant::PrimeCS4: return "prime-cs4";
    case Variant::IpwBenchmark: return "ipw";
    case Variant::DiffMeans: return "diffmeans";
  }
  return "?";
}

Setting parse_setting(const std::string& text) {
  if (text == "cs1") return Setting::CS1;
  if (text == "cs2") return Setting::CS2;
  if (text == "cs3") return Setting::CS3;
  if (text == "cs4") return Setting::CS4;
  if (text == "cs5") return Setting::CS5;
  if (text == "pa1") return Setting::PA1;
  if (text == "pa2") return Setting::PA2;
  fail(ErrorCode::Usage, "unknown setting '" + text + "'");
}

Variant parse_variant(const std::string& text) {
  if (text == "efficient") return Variant::Efficient;
  if (text == "star2") return Variant::Star2;
  if (text == "star3") return Variant::Star3;
  if (text == "prime-cs2") return Variant::PrimeCS2;
  if (text == "prime-cs4") return Variant::PrimeCS4;
  if (text == "ipw") return Variant::IpwBenchmark;
  if (text == "diffmeans") return Variant::DiffMeans;
  fail(ErrorCode::Usage, "unknown variant '" + text + "'");
}

int CrossSectionDataset::cell_count(int dd, int tt) const {
  int c = 0;
  for (int i = 0; i < n(); ++i)
    if (d[i] == dd && t[i] == tt) ++c;
  return c;
}

double CrossSectionDataset::cell_share(int dd, int tt) const {
  return n() == 0 ? 0.0 : static_cast<double>(cell_count(dd, tt)) / n();
}

int PanelDataset::group_count(int dd) const {
  int c = 0;
  for (int i = 0; i < n(); ++i)
    if (d[i] == dd) ++c;
  return c;
}

namespace {

void check_binary(int v, const char* name) {
  if (v != 0 && v != 1)
    fail(ErrorCode::NonBinaryIndicator,
         std::string(name) + " must be 0 or 1, got " + std::to_string(v));
}

void check_finite(double v, const char* name, int row) {
  if (!std::isfinite(v))
    fail(ErrorCode::NonFiniteValue,
         std::string(name) + " is not finite at row " + std::to_string(row));
}

}  // namespace

CrossSectionDataset validate_cross_section(Eigen::VectorXd y, Eigen::VectorXi d,
                                           Eigen::VectorXi t, Eigen::MatrixXd x) {
  const int n = static_cast<int>(y.size());
  if (n == 0) fail(ErrorCode::InconsistentDimension, "empty row list");
  if (d.size() != n || t.size() != n || x.rows() != n)
    fail(ErrorCode::InconsistentDimension, "column lengths differ");
  for (int i = 0; i < n; ++i) {
    check_binary(d[i], "d");
    check_binary(t[i], "t");
    check_finite(y[i], "y", i);
    for (int j = 0; j < x.cols(); ++j) check_finite(x(i, j), "x", i);
  }
  CrossSectionDataset data{std::move(y), std::move(d), std::move(t), std::move(x)};
  for (int dd = 0; dd < 2; ++dd)
    for (int tt = 0; tt < 2; ++tt)
      if (data.cell_count(dd, tt) == 0)
        fail(ErrorCode::EmptyCell,
             "no observations in cell (d=" + std::to_string(dd) +
                 ",t=" + std::to_string(tt) + ")");
  return data;
}

CrossSectionDataset validate_cross_section(const std::vector<CrossSectionRow>& rows) {
  if (rows.empty()) fail(ErrorCode::InconsistentDimension, "empty row list");
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.front().x.size());
  Eigen::VectorXd y(n);
  Eigen::VectorXi d(n), t(n);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    if (rows[i].x.size() != p)
      fail(ErrorCode::InconsistentDimension,
           "covariate dimension differs at row " + std::to_string(i));
    y[i] = rows[i].y;
    d[i] = rows[i].d;
    t[i] = rows[i].t;
    x.row(i) = rows[i].x;
  }
  return validate_cross_section(std::move(y), std::move(d), std::move(t), std::move(x));
}

PanelDataset validate_panel(Eigen::VectorXd y0, Eigen::VectorXd y1,
                            Eigen::VectorXi d, Eigen::MatrixXd x) {
  const int n = static_cast<int>(y0.size());
  if (n == 0) fail(ErrorCode::InconsistentDimension, "empty row list");
  if (y1.size() != n || d.size() != n || x.rows() != n)
    fail(ErrorCode::InconsistentDimension, "column lengths differ");
  for (int i = 0; i < n; ++i) {
    check_binary(d[i], "d");
    check_finite(y0[i], "y0", i);
    check_finite(y1[i], "y1", i);
    for (int j = 0; j < x.cols(); ++j) check_finite(x(i, j), "x", i);
  }
  PanelDataset data{std::move(y0), std::move(y1), std::move(d), std::move(x)};
  for (int dd = 0; dd < 2; ++dd)
    if (data.group_count(dd) == 0)
      fail(ErrorCode::EmptyGroup, "no observations with d=" + std::to_string(dd));
  return data;
}

PanelDataset validate_panel(const std::vector<PanelRow>& rows) {
  if (rows.empty()) fail(ErrorCode::InconsistentDimension, "empty row list");
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.front().x.size());
  Eigen::VectorXd y0(n), y1(n);
  Eigen::VectorXi d(n);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    if (rows[i].x.size() != p)
      fail(ErrorCode::InconsistentDimension,
           "covariate dimension differs at row " + std::to_string(i));
    y0[i] = rows[i].y0;
    y1[i] = rows[i].y1;
    d[i] = rows[i].d;
    x.row(i) = rows[i].x;
  }
  return validate_panel(std::move(y0), std::move(y1), std::move(d), std::move(x));
}

FoldPartition partition_folds(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n)
    fail(ErrorCode::InvalidFoldCount,
         "need 2 <= k <= n, got k=" + std::to_string(k) + ", n=" + std::to_string(n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, 0x666f6c64ULL));
  std::shuffle(order.begin(), order.end(), rng);
  FoldPartition part{n, k, std::vector<int>(n, -1)};
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int j = 0; j < size; ++j) part.assignment[order[pos++]] = f;
  }
  return part;
}

std::vector<int> FoldPartition::fold_indices(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<int> FoldPartition::complement_indices(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_real(const std::string& s, int row) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Io, "cannot parse '" + s + "' as a number at data row " +
                            std::to_string(row));
  }
}

int parse_int(const std::string& s, int row) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Io, "cannot parse '" + s + "' as an integer at data row " +
                            std::to_string(row));
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Io, "missing header in '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      fail(ErrorCode::Io, "row has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void expect_columns(const CsvTable& t, const std::vector<std::string>& prefix,
                    const std::string& path) {
  if (t.header.size() < prefix.size())
    fail(ErrorCode::Io, "too few columns in '" + path + "'");
  for (size_t j = 0; j < prefix.size(); ++j)
    if (t.header[j] != prefix[j])
      fail(ErrorCode::Io, "expected column '" + prefix[j] + "' at position " +
                              std::to_string(j + 1) + " in '" + path + "'");
}

}  // namespace

CrossSectionDataset read_cross_section_csv(const std::string& path) {
  CsvTable t = read_table(path);
  expect_columns(t, {"y", "d", "t"}, path);
  const int n = static_cast<int>(t.rows.size());
  const int p = static_cast<int>(t.header.size()) - 3;
  Eigen::VectorXd y(n);
  Eigen::VectorXi d(n), tt(n);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    y[i] = parse_real(t.rows[i][0], i);
    d[i] = parse_int(t.rows[i][1], i);
    tt[i] = parse_int(t.rows[i][2], i);
    for (int j = 0; j < p; ++j) x(i, j) = parse_real(t.rows[i][3 + j], i);
  }
  return validate_cross_section(std::move(y), std::move(d), std::move(tt), std::move(x));
}

PanelDataset read_panel_csv(const std::string& path) {
  CsvTable t = read_table(path);
  expect_columns(t, {"y0", "y1", "d"}, path);
  const int n = static_cast<int>(t.rows.size());
  const int p = static_cast<int>(t.header.size()) - 3;
  Eigen::VectorXd y0(n), y1(n);
  Eigen::VectorXi d(n);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    y0[i] = parse_real(t.rows[i][0], i);
    y1[i] = parse_real(t.rows[i][1], i);
    d[i] = parse_int(t.rows[i][2], i);
    for (int j = 0; j < p; ++j) x(i, j) = parse_real(t.rows[i][3 + j], i);
  }
  return validate_panel(std::move(y0), std::move(y1), std::move(d), std::move(x));
}

PrePeriodData read_pre_period_csv(const std::string& path) {
  CsvTable t = read_table(path);
  expect_columns(t, {"y", "d", "period"}, path);
  const int n = static_cast<int>(t.rows.size());
  const int p = static_cast<int>(t.header.size()) - 3;
  PrePeriodData data;
  data.y.resize(n);
  data.d.resize(n);
  data.period.resize(n);
  data.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    data.y[i] = parse_real(t.rows[i][0], i);
    data.d[i] = parse_int(t.rows[i][1], i);
    data.period[i] = parse_int(t.rows[i][2], i);
    for (int j = 0; j < p; ++j) data.x(i, j) = parse_real(t.rows[i][3 + j], i);
  }
  return data;
}

namespace {

void write_number(std::ostream& out, double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  out << ss.str();
}

}  // namespace

void write_csv(const CrossSectionDataset& data, std::ostream& out) {
  out << "y,d,t";
  for (int j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    write_number(out, data.y[i]);
    out << "," << data.d[i] << "," << data.t[i];
    for (int j = 0; j < data.p(); ++j) {
      out << ",";
      write_number(out, data.x(i, j));
    }
    out << "\n";
  }
}

void write_csv(const PanelDataset& data, std::ostream& out) {
  out << "y0,y1,d";
  for (int j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    write_number(out, data.y0[i]);
    out << ",";
    write_number(out, data.y1[i]);
    out << "," << data.d[i];
    for (int j = 0; j < data.p(); ++j) {
      out << ",";
      write_number(out, data.x(i, j));
    }
    out << "\n";
  }
}

void write_csv(const CrossSectionDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  write_csv(data, out);
}

void write_csv(const PanelDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  write_csv(data, out);
}

}  // namespace did
