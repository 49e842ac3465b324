#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "did/common.hpp"

namespace did {

// Assumption settings. CS-* apply to repeated cross-sections, PA-* to panels.
enum class Setting { CS1, CS2, CS3, CS4, CS5, PA1, PA2 };

// Score variants. Efficient is the setting's efficient influence function;
// the others trade efficiency for weaker first-stage requirements or serve
// as benchmarks.
enum class Variant {
  Efficient,
  Star2,         // CS-1 factorization p_{D=d}(t,x) p_{T=t}(x)
  Star3,         // CS-1 factorization p_{T=t}(d,x) p_{D=d}(x)
  PrimeCS2,      // CS-2 score with DT/p_DT adjustment term
  PrimeCS4,      // CS-4 score without treated-cell outcome regressions
  IpwBenchmark,  // inverse probability weighting benchmark (CS-4)
  DiffMeans,     // difference in cell/group means (CS-5, PA-2)
};

bool is_panel(Setting s);
bool compatible(Setting s, Variant v);
std::string to_string(Setting s);
std::string to_string(Variant v);
Setting parse_setting(const std::string& text);
Variant parse_variant(const std::string& text);

struct CrossSectionRow {
  double y = 0.0;
  int d = 0;
  int t = 0;
  Eigen::VectorXd x;
};

struct PanelRow {
  double y0 = 0.0;
  double y1 = 0.0;
  int d = 0;
  Eigen::VectorXd x;
};

// Column-oriented storage; rows are validated on construction and the
// dataset is immutable afterwards.
struct CrossSectionDataset {
  Eigen::VectorXd y;
  Eigen::VectorXi d;
  Eigen::VectorXi t;
  Eigen::MatrixXd x;  // n x p

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(x.cols()); }
  int cell_count(int dd, int tt) const;
  double cell_share(int dd, int tt) const;
};

struct PanelDataset {
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
  Eigen::VectorXi d;
  Eigen::MatrixXd x;

  int n() const { return static_cast<int>(y0.size()); }
  int p() const { return static_cast<int>(x.cols()); }
  Eigen::VectorXd delta_y() const { return y1 - y0; }
  int group_count(int dd) const;
};

CrossSectionDataset validate_cross_section(const std::vector<CrossSectionRow>& rows);
CrossSectionDataset validate_cross_section(Eigen::VectorXd y, Eigen::VectorXi d,
                                           Eigen::VectorXi t, Eigen::MatrixXd x);
PanelDataset validate_panel(const std::vector<PanelRow>& rows);
PanelDataset validate_panel(Eigen::VectorXd y0, Eigen::VectorXd y1,
                            Eigen::VectorXi d, Eigen::MatrixXd x);

// Fold assignment for cross-fitting. Sizes differ by at most one; the
// remainder goes one-each to the lowest-numbered folds.
struct FoldPartition {
  int n = 0;
  int k = 0;
  std::vector<int> assignment;  // fold index in [0, k)

  std::vector<int> fold_indices(int fold) const;
  std::vector<int> complement_indices(int fold) const;
};

FoldPartition partition_folds(int n, int k, std::uint64_t seed);

// CSV interchange. Cross-section schema: y,d,t,x1,...,xp.
// Panel schema: y0,y1,d,x1,...,xp.
CrossSectionDataset read_cross_section_csv(const std::string& path);
PanelDataset read_panel_csv(const std::string& path);
void write_csv(const CrossSectionDataset& data, const std::string& path);
void write_csv(const PanelDataset& data, const std::string& path);
void write_csv(const CrossSectionDataset& data, std::ostream& out);
void write_csv(const PanelDataset& data, std::ostream& out);

// Pre-period data with original (integer) period labels, used by the
// placebo workflow. Schema: y,d,period,x1,...,xp.
struct PrePeriodData {
  Eigen::VectorXd y;
  Eigen::VectorXi d;
  Eigen::VectorXi period;
  Eigen::MatrixXd x;
  int n() const { return static_cast<int>(y.size()); }
};

PrePeriodData read_pre_period_csv(const std::string& path);

}  // namespace did
