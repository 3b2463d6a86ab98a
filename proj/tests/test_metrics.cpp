#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "dmon/metrics.hpp"
#include "dmon/rng.hpp"

using namespace dmon;

namespace {

// Independent cell-by-cell oracle, written against the definitions rather
// than the implementation.
struct Oracle {
  std::vector<std::vector<long long>> conf;
  int l = 0;

  Oracle(const std::vector<LabelMatrix>& pred, const std::vector<LabelMatrix>& gold, int classes,
         bool include_diagonal)
      : conf(static_cast<size_t>(classes), std::vector<long long>(static_cast<size_t>(classes))),
        l(classes) {
    for (size_t m = 0; m < pred.size(); ++m) {
      for (int i = 0; i < pred[m].n; ++i) {
        for (int j = 0; j < pred[m].n; ++j) {
          if (i == j && !include_diagonal) continue;
          conf[static_cast<size_t>(gold[m].at(i, j))][static_cast<size_t>(pred[m].at(i, j))]++;
        }
      }
    }
  }

  double f1(int c) const {
    long long tp = conf[static_cast<size_t>(c)][static_cast<size_t>(c)];
    long long fp = 0, fn = 0;
    for (int o = 0; o < l; ++o) {
      if (o == c) continue;
      fp += conf[static_cast<size_t>(o)][static_cast<size_t>(c)];
      fn += conf[static_cast<size_t>(c)][static_cast<size_t>(o)];
    }
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  double macro() const {
    double s = 0.0;
    for (int c = 0; c < l; ++c) s += f1(c);
    return s / l;
  }

  // Collapse the given classes into one super-class, score it against rest.
  double merged_f1(const std::vector<int>& ids) const {
    auto in = [&](int c) { return std::find(ids.begin(), ids.end(), c) != ids.end(); };
    long long tp = 0, fp = 0, fn = 0;
    for (int g = 0; g < l; ++g) {
      for (int p = 0; p < l; ++p) {
        if (in(g) && in(p)) tp += conf[static_cast<size_t>(g)][static_cast<size_t>(p)];
        if (!in(g) && in(p)) fp += conf[static_cast<size_t>(g)][static_cast<size_t>(p)];
        if (in(g) && !in(p)) fn += conf[static_cast<size_t>(g)][static_cast<size_t>(p)];
      }
    }
    const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    return prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
  }
};

LabelMatrix random_matrix(int n, int l, Rng& rng) {
  LabelMatrix m = LabelMatrix::filled(n, 0);
  for (int& v : m.values) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(l)));
  return m;
}

// Gold/pred pair realizing the hand confusion
//   gold a: pred a,a,a,b | gold b: pred b,b,n | gold n: pred a,n,n,n,n
// over the 12 off-diagonal cells of a 4x4 matrix.
std::pair<LabelMatrix, LabelMatrix> hand_case(const LabelSpace& space) {
  const int a = space.index_of("alpha"), b = space.index_of("beta"), n = space.no_relation_index;
  LabelMatrix gold = LabelMatrix::filled(4, n);
  LabelMatrix pred = LabelMatrix::filled(4, n);
  const int cells[12][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 2}, {1, 3},
                            {2, 0}, {2, 1}, {2, 3}, {3, 0}, {3, 1}, {3, 2}};
  const int golds[12] = {a, a, a, a, b, b, b, n, n, n, n, n};
  const int preds[12] = {a, a, a, b, b, b, n, a, n, n, n, n};
  for (int i = 0; i < 12; ++i) {
    gold.at(cells[i][0], cells[i][1]) = golds[i];
    pred.at(cells[i][0], cells[i][1]) = preds[i];
  }
  return {pred, gold};
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 on every column") {
  const LabelSpace space{{"attack", "support", "none"}, 2};
  // Gold with every class present.
  LabelMatrix gold = LabelMatrix::filled(3, space.no_relation_index);
  gold.at(0, 1) = 0;
  gold.at(1, 2) = 1;
  gold.at(2, 0) = 1;

  for (const char* preset : {"abstrct", "cdcp", "scidtb", "auto"}) {
    const auto report = macro_f1({gold}, {gold}, space, make_columns(preset, space));
    for (const auto& [name, value] : report.averages) {
      INFO(preset << " / " << name);
      CHECK(value == 1.0);
    }
    for (double f : report.per_class_f1) CHECK(f == 1.0);
  }
}

TEST_CASE("hand-built confusion matches independent precision/recall arithmetic") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  const auto [pred, gold] = hand_case(space);
  const auto report = macro_f1({pred}, {gold}, space, make_columns("auto", space));

  CHECK(report.num_cells == 12);
  CHECK(report.per_class_f1[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.per_class_f1[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.per_class_f1[2] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(report.average("F1") ==
        doctest::Approx((0.75 + 2.0 / 3.0 + 0.8) / 3.0).epsilon(1e-12));

  // Confusion rows are gold, columns are pred.
  CHECK(report.confusion[0] == std::vector<long long>{3, 1, 0});
  CHECK(report.confusion[1] == std::vector<long long>{0, 2, 1});
  CHECK(report.confusion[2] == std::vector<long long>{1, 0, 4});
}

TEST_CASE("merged related-vs-rest column collapses classes") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  const auto [pred, gold] = hand_case(space);
  const auto report = macro_f1({pred}, {gold}, space, make_columns("cdcp", space));

  // tp 6, fp 1, fn 1 over the merged {alpha, beta} class: F1 = 6/7.
  CHECK(report.average("R-F1") == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(report.average("U-F1") == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(report.average("F1") ==
        doctest::Approx((6.0 / 7.0 + 0.8) / 2.0).epsilon(1e-12));
}

TEST_CASE("macro_f1 matches the oracle on random corpora") {
  Rng rng(2025);
  for (int rep = 0; rep < 100; ++rep) {
    const int l = 2 + static_cast<int>(rng.below(4));
    LabelSpace space;
    for (int c = 0; c < l; ++c) space.labels.push_back("c" + std::to_string(c));
    space.no_relation_index = l - 1;

    const int docs = 1 + static_cast<int>(rng.below(3));
    std::vector<LabelMatrix> pred, gold;
    for (int m = 0; m < docs; ++m) {
      const int n = 2 + static_cast<int>(rng.below(5));
      pred.push_back(random_matrix(n, l, rng));
      gold.push_back(random_matrix(n, l, rng));
    }
    const bool diag = rng.below(2) == 1;

    const auto report = macro_f1(pred, gold, space, make_columns("auto", space), diag);
    const Oracle oracle(pred, gold, l, diag);
    for (int c = 0; c < l; ++c) {
      CHECK(report.per_class_f1[static_cast<size_t>(c)] ==
            doctest::Approx(oracle.f1(c)).epsilon(1e-9));
    }
    CHECK(report.average("F1") == doctest::Approx(oracle.macro()).epsilon(1e-9));

    // Related-merged column against the oracle's collapse.
    std::vector<int> related;
    for (int c = 0; c < l; ++c) {
      if (c != space.no_relation_index) related.push_back(c);
    }
    const auto cdcp = macro_f1(pred, gold, space, make_columns("cdcp", space), diag);
    CHECK(cdcp.average("R-F1") == doctest::Approx(oracle.merged_f1(related)).epsilon(1e-9));
  }
}

TEST_CASE("a class absent from pred and gold scores zero and still counts") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  LabelMatrix gold = LabelMatrix::filled(2, space.no_relation_index);
  gold.at(0, 1) = 0;
  gold.at(1, 0) = 0;  // only alpha and none occur

  const auto report = macro_f1({gold}, {gold}, space, make_columns("auto", space));
  CHECK(report.per_class_f1[0] == 1.0);
  CHECK(report.per_class_f1[1] == 0.0);
  CHECK(report.per_class_f1[2] == 1.0);
  CHECK(report.average("F1") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("swapping pred and gold transposes the confusion and keeps F1") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  const auto [pred, gold] = hand_case(space);
  const auto fwd = macro_f1({pred}, {gold}, space, make_columns("auto", space));
  const auto rev = macro_f1({gold}, {pred}, space, make_columns("auto", space));

  for (int g = 0; g < 3; ++g) {
    for (int p = 0; p < 3; ++p) {
      CHECK(fwd.confusion[static_cast<size_t>(g)][static_cast<size_t>(p)] ==
            rev.confusion[static_cast<size_t>(p)][static_cast<size_t>(g)]);
    }
  }
  // Precision and recall swap, so the harmonic mean is unchanged.
  for (int c = 0; c < 3; ++c) {
    CHECK(fwd.per_class_f1[static_cast<size_t>(c)] ==
          doctest::Approx(rev.per_class_f1[static_cast<size_t>(c)]).epsilon(1e-12));
  }
}

TEST_CASE("preset column layouts") {
  const LabelSpace space{{"attack", "support", "none"}, 2};
  auto names = [](const std::vector<ColumnDef>& cols) {
    std::vector<std::string> out;
    for (const auto& c : cols) out.push_back(c.name);
    return out;
  };
  CHECK(names(make_columns("abstrct", space)) ==
        std::vector<std::string>{"F1", "S-F1", "A-F1", "U-F1"});
  CHECK(names(make_columns("cdcp", space)) == std::vector<std::string>{"F1", "R-F1", "U-F1"});
  CHECK(names(make_columns("scidtb", space)) ==
        std::vector<std::string>{"Full-F1", "F1", "R-F1", "U-F1"});
  CHECK(names(make_columns("auto", space)) ==
        std::vector<std::string>{"F1", "attack-F1", "support-F1", "none-F1"});

  CHECK_THROWS_AS(make_columns("glue", space), ValidationError);
  // abstrct needs the support/attack labels by name.
  const LabelSpace other{{"reason", "evidence", "none"}, 2};
  CHECK_THROWS_AS(make_columns("abstrct", other), ValidationError);
  CHECK_NOTHROW(make_columns("cdcp", other));
}

TEST_CASE("scidtb Full-F1 is the all-class macro while F1 merges") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  const auto [pred, gold] = hand_case(space);
  const auto report = macro_f1({pred}, {gold}, space, make_columns("scidtb", space));
  CHECK(report.average("Full-F1") ==
        doctest::Approx((0.75 + 2.0 / 3.0 + 0.8) / 3.0).epsilon(1e-12));
  CHECK(report.average("F1") ==
        doctest::Approx((6.0 / 7.0 + 0.8) / 2.0).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  const LabelSpace space{{"a", "b"}, 1};
  const auto cols = make_columns("auto", space);
  LabelMatrix m2 = LabelMatrix::filled(2, 0);
  LabelMatrix m3 = LabelMatrix::filled(3, 0);
  CHECK_THROWS_AS(macro_f1({m2}, {m3}, space, cols), ValidationError);
  CHECK_THROWS_AS(macro_f1({m2, m2}, {m2}, space, cols), ValidationError);

  LabelMatrix bad = LabelMatrix::filled(2, 7);  // class index outside the space
  CHECK_THROWS_AS(macro_f1({bad}, {m2}, space, cols), ValidationError);
}

TEST_CASE("unknown average name throws") {
  const LabelSpace space{{"a", "b"}, 1};
  LabelMatrix m = LabelMatrix::filled(2, 0);
  const auto report = macro_f1({m}, {m}, space, make_columns("auto", space));
  CHECK_THROWS_AS(report.average("S-F1"), ValidationError);
}

TEST_CASE("report serialization carries the column order") {
  const LabelSpace space{{"alpha", "beta", "none"}, 2};
  const auto [pred, gold] = hand_case(space);
  const auto report = macro_f1({pred}, {gold}, space, make_columns("scidtb", space));

  const auto j = report.to_json();
  CHECK(j["averages"].size() == 4);
  auto it = j["averages"].begin();
  CHECK(it.key() == "Full-F1");
  CHECK(j["num_cells"] == 12);
  CHECK(j["labels"].size() == 3);

  const std::string csv = report.to_csv();
  CHECK(csv.find("Full-F1,F1,R-F1,U-F1") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
