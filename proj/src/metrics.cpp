#include "dmon/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace dmon {

namespace {

std::vector<int> related_class_ids(const LabelSpace& space) {
  std::vector<int> ids;
  for (int c = 0; c < space.size(); ++c) {
    if (c != space.no_relation_index) ids.push_back(c);
  }
  return ids;
}

int required_class(const LabelSpace& space, const char* label, std::string_view preset) {
  if (auto id = space.find(label)) return *id;
  throw ValidationError("metrics preset '" + std::string(preset) + "' needs label '" + label +
                        "' which the label space lacks");
}

double f1_from_counts(long long tp, long long fp, long long fn) {
  const double precision =
      tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall =
      tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::vector<ColumnDef> make_columns(std::string_view preset, const LabelSpace& space) {
  space.validate();
  std::vector<ColumnDef> cols;
  const int none = space.no_relation_index;
  if (preset == "abstrct") {
    cols.push_back({"F1", ColumnDef::Kind::macro_all, {}, {}});
    cols.push_back({"S-F1", ColumnDef::Kind::per_class,
                    {required_class(space, "support", preset)}, {}});
    cols.push_back({"A-F1", ColumnDef::Kind::per_class,
                    {required_class(space, "attack", preset)}, {}});
    cols.push_back({"U-F1", ColumnDef::Kind::per_class, {none}, {}});
  } else if (preset == "cdcp") {
    if (space.size() < 2) {
      throw ValidationError("metrics preset 'cdcp' needs at least one related class");
    }
    cols.push_back({"F1", ColumnDef::Kind::mean_of_columns, {}, {"R-F1", "U-F1"}});
    cols.push_back({"R-F1", ColumnDef::Kind::merged_vs_rest, related_class_ids(space), {}});
    cols.push_back({"U-F1", ColumnDef::Kind::per_class, {none}, {}});
  } else if (preset == "scidtb") {
    if (space.size() < 2) {
      throw ValidationError("metrics preset 'scidtb' needs at least one related class");
    }
    cols.push_back({"Full-F1", ColumnDef::Kind::macro_all, {}, {}});
    cols.push_back({"F1", ColumnDef::Kind::mean_of_columns, {}, {"R-F1", "U-F1"}});
    cols.push_back({"R-F1", ColumnDef::Kind::merged_vs_rest, related_class_ids(space), {}});
    cols.push_back({"U-F1", ColumnDef::Kind::per_class, {none}, {}});
  } else if (preset == "auto") {
    cols.push_back({"F1", ColumnDef::Kind::macro_all, {}, {}});
    for (int c = 0; c < space.size(); ++c) {
      cols.push_back({space.labels[static_cast<size_t>(c)] + "-F1", ColumnDef::Kind::per_class,
                      {c}, {}});
    }
  } else {
    throw ValidationError("unknown metrics preset '" + std::string(preset) +
                          "' (expected abstrct, cdcp, scidtb, or auto)");
  }
  return cols;
}

double MetricsReport::average(std::string_view column) const {
  for (const auto& [name, value] : averages) {
    if (name == column) return value;
  }
  throw ValidationError("metrics report has no column '" + std::string(column) + "'");
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["labels"] = labels;
  auto per_class = nlohmann::ordered_json::object();
  for (size_t c = 0; c < labels.size(); ++c) per_class[labels[c]] = per_class_f1[c];
  j["per_class_f1"] = std::move(per_class);
  auto avg = nlohmann::ordered_json::object();
  for (const auto& [name, value] : averages) avg[name] = value;
  j["averages"] = std::move(avg);
  j["confusion"] = confusion;
  j["num_cells"] = num_cells;
  j["num_documents"] = num_documents;
  j["include_diagonal"] = include_diagonal;
  return j;
}

std::string MetricsReport::to_csv() const {
  std::string header, row;
  for (const auto& [name, value] : averages) {
    if (!header.empty()) {
      header += ',';
      row += ',';
    }
    header += name;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    row += buf;
  }
  return header + "\n" + row + "\n";
}

MetricsReport macro_f1(const std::vector<LabelMatrix>& pred, const std::vector<LabelMatrix>& gold,
                       const LabelSpace& space, const std::vector<ColumnDef>& columns,
                       bool include_diagonal) {
  space.validate();
  if (pred.size() != gold.size()) {
    throw ValidationError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                          std::to_string(gold.size()) + " gold documents");
  }
  const int l = space.size();

  MetricsReport report;
  report.labels = space.labels;
  report.include_diagonal = include_diagonal;
  report.num_documents = static_cast<int>(pred.size());
  report.confusion.assign(static_cast<size_t>(l), std::vector<long long>(static_cast<size_t>(l), 0));

  for (size_t di = 0; di < pred.size(); ++di) {
    if (pred[di].n != gold[di].n) {
      throw ValidationError("metrics: document " + std::to_string(di) +
                            " has misaligned prediction (" + std::to_string(pred[di].n) +
                            ") and gold (" + std::to_string(gold[di].n) + ") sizes");
    }
    const int n = pred[di].n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j && !include_diagonal) continue;
        const int g = gold[di].at(i, j);
        const int p = pred[di].at(i, j);
        if (g < 0 || g >= l || p < 0 || p >= l) {
          throw ValidationError("metrics: class index outside the label space in document " +
                                std::to_string(di));
        }
        ++report.confusion[static_cast<size_t>(g)][static_cast<size_t>(p)];
        ++report.num_cells;
      }
    }
  }

  report.per_class_f1.resize(static_cast<size_t>(l));
  for (int c = 0; c < l; ++c) {
    long long tp = report.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)];
    long long fp = 0, fn = 0;
    for (int o = 0; o < l; ++o) {
      if (o == c) continue;
      fp += report.confusion[static_cast<size_t>(o)][static_cast<size_t>(c)];
      fn += report.confusion[static_cast<size_t>(c)][static_cast<size_t>(o)];
    }
    report.per_class_f1[static_cast<size_t>(c)] = f1_from_counts(tp, fp, fn);
  }

  // Two passes: every direct column first, then the means over columns.
  report.averages.clear();
  auto value_of = [&report](const std::string& name) {
    for (const auto& [n, v] : report.averages) {
      if (n == name) return v;
    }
    throw ValidationError("metrics column '" + name + "' referenced before definition");
  };

  for (const ColumnDef& col : columns) {
    if (col.kind == ColumnDef::Kind::mean_of_columns) continue;
    double value = 0.0;
    switch (col.kind) {
      case ColumnDef::Kind::macro_all: {
        double sum = 0.0;
        for (double f : report.per_class_f1) sum += f;
        value = sum / static_cast<double>(l);
        break;
      }
      case ColumnDef::Kind::per_class: {
        if (col.class_ids.size() != 1 || col.class_ids[0] < 0 || col.class_ids[0] >= l) {
          throw ValidationError("metrics column '" + col.name + "': bad class id");
        }
        value = report.per_class_f1[static_cast<size_t>(col.class_ids[0])];
        break;
      }
      case ColumnDef::Kind::merged_vs_rest: {
        std::vector<bool> merged(static_cast<size_t>(l), false);
        for (int c : col.class_ids) {
          if (c < 0 || c >= l) {
            throw ValidationError("metrics column '" + col.name + "': bad class id");
          }
          merged[static_cast<size_t>(c)] = true;
        }
        long long tp = 0, fp = 0, fn = 0;
        for (int g = 0; g < l; ++g) {
          for (int p = 0; p < l; ++p) {
            const long long count = report.confusion[static_cast<size_t>(g)][static_cast<size_t>(p)];
            const bool gm = merged[static_cast<size_t>(g)];
            const bool pm = merged[static_cast<size_t>(p)];
            if (gm && pm) tp += count;
            if (!gm && pm) fp += count;
            if (gm && !pm) fn += count;
          }
        }
        value = f1_from_counts(tp, fp, fn);
        break;
      }
      case ColumnDef::Kind::mean_of_columns:
        break;  // handled below
    }
    report.averages.emplace_back(col.name, value);
  }
  std::vector<std::pair<std::string, double>> ordered;
  for (const ColumnDef& col : columns) {
    if (col.kind == ColumnDef::Kind::mean_of_columns) {
      if (col.member_columns.empty()) {
        throw ValidationError("metrics column '" + col.name + "': no member columns");
      }
      double sum = 0.0;
      for (const std::string& member : col.member_columns) sum += value_of(member);
      ordered.emplace_back(col.name, sum / static_cast<double>(col.member_columns.size()));
    } else {
      ordered.emplace_back(col.name, value_of(col.name));
    }
  }
  report.averages = std::move(ordered);
  return report;
}

}  // namespace dmon
