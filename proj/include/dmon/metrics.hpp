#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmon/types.hpp"

namespace dmon {

// One reported column. Kinds:
//   macro_all       unweighted mean of per-class F1 over the whole space
//   per_class       F1 of a single class
//   merged_vs_rest  collapse the member classes into one super-class and
//                   report its F1 against everything else
//   mean_of_columns unweighted mean of previously computed columns
struct ColumnDef {
  enum class Kind { macro_all, per_class, merged_vs_rest, mean_of_columns };

  std::string name;
  Kind kind = Kind::macro_all;
  std::vector<int> class_ids;               // per_class (one id) / merged_vs_rest
  std::vector<std::string> member_columns;  // mean_of_columns
};

// Named presets mirroring the reporting layouts of the evaluated corpora:
//   abstrct: F1 (macro over all), S-F1 (support), A-F1 (attack), U-F1
//   cdcp:    F1 = mean(R-F1, U-F1), R-F1 (all non-none merged), U-F1
//   scidtb:  Full-F1 (macro over all), F1 = mean(R-F1, U-F1),
//            R-F1 (all non-none merged), U-F1
//   auto:    F1 (macro over all) plus one column per class
// U-F1 is always the no-relation class. Presets that need specific label
// names throw ValidationError when the space lacks them.
std::vector<ColumnDef> make_columns(std::string_view preset, const LabelSpace& space);

struct MetricsReport {
  std::vector<std::string> labels;
  std::vector<double> per_class_f1;                    // indexed like labels
  std::vector<std::pair<std::string, double>> averages;  // column order preserved
  std::vector<std::vector<long long>> confusion;       // [gold][pred]
  long long num_cells = 0;
  int num_documents = 0;
  bool include_diagonal = false;

  double average(std::string_view column) const;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;  // header row of column names + one value row
};

// Pools all cells of all documents into one confusion matrix (diagonal cells
// excluded unless include_diagonal), then computes per-class F1 with the
// 0/0 -> 0 convention and the requested columns.
MetricsReport macro_f1(const std::vector<LabelMatrix>& pred, const std::vector<LabelMatrix>& gold,
                       const LabelSpace& space, const std::vector<ColumnDef>& columns,
                       bool include_diagonal = false);

}  // namespace dmon
