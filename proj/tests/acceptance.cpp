// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion (with the
// measured values) and exits non-zero when any criterion fails.
//
//   acceptance            run all criteria
//   acceptance 4 7 10     run a subset
#include <boost/math/special_functions/beta.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fdbench/balance.hpp"
#include "fdbench/density.hpp"
#include "fdbench/error.hpp"
#include "fdbench/evaluate.hpp"
#include "fdbench/experiment.hpp"
#include "fdbench/learn.hpp"
#include "fdbench/rng.hpp"
#include "fdbench/variants.hpp"
#include "fdbench/vectorize.hpp"
#include "fixtures.hpp"

using namespace fdbench;
using namespace fdbench::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = FDBENCH_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SparseMatrix dense_to_sparse(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  SparseMatrix m;
  m.n_cols = cols;
  for (const auto& r : rows) m.append_dense_row(r);
  return m;
}

// Two-sided Student t p-value through the regularized incomplete beta.
double t_p_oracle(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return boost::math::ibeta(df / 2, 0.5, df / (df + t * t));
}

// --- 1 -----------------------------------------------------------------------

Outcome fd_anchors() {
  struct Row {
    VariantId v;
    std::uint64_t unique, all;
    const char* printed;
  };
  const Row rows[] = {
      {VariantId::kDep, 149360, 309592, "0.4824"},   {VariantId::kDepNer, 147560, 309592, "0.4766"},
      {VariantId::kChnk, 39017, 309592, "0.1260"},   {VariantId::kChnkNer, 33612, 309592, "0.1085"},
      {VariantId::kTokPos, 31474, 367139, "0.0857"}, {VariantId::kLemPos, 26598, 367180, "0.0724"},
      {VariantId::kTok, 25785, 367139, "0.0702"},    {VariantId::kLem, 21766, 367180, "0.0592"},
      {VariantId::kTokNer, 21627, 367102, "0.0589"}, {VariantId::kLemNer, 17696, 367142, "0.0482"},
      {VariantId::kPos, 19, 357604, "0.0001"},
  };
  std::size_t ok = 0;
  std::string mism;
  for (const auto& r : rows) {
    const std::string got = format_fixed(make_density(r.v, r.unique, r.all).fd, 4);
    if (got == r.printed) {
      ++ok;
    } else {
      mism += " " + std::string(variant_name(r.v)) + "=" + got + "(printed " + r.printed + ")";
    }
  }
  return {ok == 11, std::to_string(ok) + "/11 rows match at 4 dp" + (mism.empty() ? "" : ";" + mism)};
}

// --- 2 -----------------------------------------------------------------------

Outcome metric_anchor() {
  const auto y = exact_labels(913, 11859);
  std::vector<Prediction> all_neg(y.size(), Prediction{0, 0.0});
  const Metrics m = score(all_neg, y);
  const std::string acc = format_fixed(m.acc, 3), prec = format_fixed(m.prec, 3),
                    rec = format_fixed(m.rec, 3), f1 = format_fixed(m.f1, 3);
  const bool pass = acc == "0.929" && prec == "0.464" && rec == "0.500" && f1 == "0.482";
  return {pass, "acc " + acc + " prec " + prec + " rec " + rec + " F1 " + f1 + " (F1 exact " +
                    fmt("%.6f", m.f1) + "; expected .929/.464/.500/.482)"};
}

// --- 3 -----------------------------------------------------------------------

Outcome p_anchors() {
  const double p1 = pearson_p(-0.7671, 11), p2 = pearson_p(-0.6737, 11);
  const bool pass = std::abs(p1 - 0.0058) <= 0.0005 && std::abs(p2 - 0.0231) <= 0.0005;
  return {pass, "p(-.7671, 11) = " + fmt("%.4f", p1) + ", p(-.6737, 11) = " + fmt("%.4f", p2)};
}

// --- 4 -----------------------------------------------------------------------

double direct_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

Outcome published_correlation() {
  std::ifstream din(kSource / "data/published/density.csv"), min(kSource / "data/published/metrics.csv");
  const auto density = read_density_csv(din);
  const auto grid = read_grid_csv(min);
  auto rows = correlate(density, grid);

  std::vector<VariantId> order;
  for (auto v : kReportVariantOrder) order.push_back(v);
  std::map<VariantId, double> fd;
  for (const auto& d : density) fd[d.variant] = d.fd;
  std::vector<double> x;
  for (auto v : order) x.push_back(fd.at(v));

  auto lookup = [&](const std::string& pairing) {
    for (const auto& r : rows) {
      if (r.family == Family::kKNN && r.pairing == pairing) return r.corr.rho;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double smote_rho = lookup("smote"), plain_rho = lookup("plain");
  const double oracle_smote = direct_pearson(x, *f1_vector(grid, Family::kKNN, order, "smote"));
  const double oracle_plain = direct_pearson(x, *f1_vector(grid, Family::kKNN, order, "plain"));
  const bool agrees = std::abs(smote_rho - oracle_smote) < 1e-12 && std::abs(plain_rho - oracle_plain) < 1e-12;
  const bool pass = agrees && std::abs(smote_rho - (-0.7671)) <= 0.02;
  return {pass, "kNN FD vs SMOTE-table F1: rho = " + fmt("%.4f", smote_rho) + " (oracle " +
                    fmt("%.4f", oracle_smote) + "); plain-table pairing rho = " + fmt("%.4f", plain_rho)};
}

// --- 5 -----------------------------------------------------------------------

Outcome gradient_checks() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(5);
  auto y = exact_labels(6, 10);
  rng.shuffle(y);
  const auto docs = separable_docs(rng, y);
  const auto vocab = Vocabulary::build(docs);
  const SparseMatrix x = tfidf(docs, vocab);
  const auto w = class_weights(y);

  IndexBatch seqs;
  seqs.max_len = 12;
  seqs.vocab_size = 10;
  std::vector<int> ys;
  for (std::size_t i = 0; i < 6; ++i) {
    IndexSequence s(12, 0);
    const std::size_t len = 3 + rng.below(9);
    for (std::size_t t = 0; t < len; ++t) s[t] = static_cast<std::int32_t>(3 + rng.below(7));
    if (i % 2) s[rng.below(len)] = 2;
    seqs.append(s);
    ys.push_back(static_cast<int>(i % 2));
  }

  std::string detail;
  bool pass = true;
  auto record = [&](const char* name, double err, double limit) {
    detail += std::string(name) + " " + fmt("%.1e", err) + " ";
    pass = pass && err < limit;
  };
  record("LR", gradient_check({Family::kLR, {}, 1}, x, y, w, 1e-5).max_relative_error, 1e-6);
  record("SVM", gradient_check({Family::kSVM, {}, 1}, x, y, w, 1e-6).max_relative_error, 1e-4);
  ModelSpec mlp{Family::kMLP, {}, 1};
  mlp.params.hidden_units = 16;
  record("MLP", gradient_check(mlp, x, y, w, 1e-5).max_relative_error, 1e-4);
  for (Family f : {Family::kCNN1L, Family::kCNN2L}) {
    ModelSpec cnn{f, {}, 1};
    cnn.params.max_len = 12;
    cnn.params.embed_dim = 8;
    cnn.params.feature_maps = 4;
    cnn.params.dense_units = 8;
    record(f == Family::kCNN1L ? "CNN1L" : "CNN2L",
           gradient_check(cnn, seqs, ys, class_weights(ys), 1e-5).max_relative_error, 1e-4);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && secs < 60;
  return {pass, detail + fmt("(%.1f s)", secs)};
}

// --- 6 -----------------------------------------------------------------------

Outcome oracles() {
  Rng rng(6);
  std::size_t violations = 0;
  double worst = 0;
  auto close = [&](double a, double b) {
    const double d = std::abs(a - b);
    worst = std::max(worst, d);
    if (!(d <= 1e-12)) ++violations;
  };

  // kNN against an exhaustive cosine scan.
  for (int trial = 0; trial < 20; ++trial) {
    auto row = [&] {
      std::vector<double> r(6);
      for (double& v : r) v = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.1, 2);
      const std::size_t a = rng.below(6);
      r[a] = rng.uniform(0.1, 2);
      r[(a + 1 + rng.below(5)) % 6] = rng.uniform(0.1, 2);
      return r;
    };
    std::vector<std::vector<double>> train_rows(25), queries(10);
    for (auto& r : train_rows) r = row();
    for (auto& r : queries) r = row();
    auto y = random_labels(rng, 25, 0.4);
    y[0] = 0;
    y[1] = 1;
    auto m = train({Family::kKNN, {}, 0}, dense_to_sparse(train_rows, 6), y, ClassWeights::uniform());
    auto pred = m.predict(dense_to_sparse(queries, 6));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t k = 0; k < 6; ++k) {
          dot += queries[q][k] * train_rows[i][k];
          na += queries[q][k] * queries[q][k];
          nb += train_rows[i][k] * train_rows[i][k];
        }
        const double d = 1 - dot / std::sqrt(na * nb);
        if (d < best) {
          best = d;
          arg = i;
        }
      }
      if (pred[q].label != y[arg]) ++violations;
    }
  }

  // Multinomial NB against Bayes' rule by hand on 2- and 3-document corpora.
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_docs = 2 + rng.below(2), cols = 2 + rng.below(3);
    std::vector<std::vector<double>> docs(n_docs, std::vector<double>(cols));
    for (auto& d : docs) {
      for (double& v : d) v = static_cast<double>(rng.below(4));
    }
    std::vector<int> y(n_docs);
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    y[0] = 0;
    y[1] = 1;
    auto m = train({Family::kNB, {}, 0}, dense_to_sparse(docs, cols), y, ClassWeights::uniform());
    std::vector<double> q(cols);
    for (double& v : q) v = static_cast<double>(rng.below(3));
    double joint[2];
    for (int c = 0; c < 2; ++c) {
      double n_c = 0, total = 0;
      std::vector<double> counts(cols, 0);
      for (std::size_t d = 0; d < n_docs; ++d) {
        if (y[d] != c) continue;
        n_c += 1;
        for (std::size_t j = 0; j < cols; ++j) counts[j] += docs[d][j];
      }
      for (double v : counts) total += v;
      joint[c] = n_c / static_cast<double>(n_docs);
      for (std::size_t j = 0; j < cols; ++j) {
        joint[c] *= std::pow((counts[j] + 1) / (total + static_cast<double>(cols)), q[j]);
      }
    }
    close(m.predict(dense_to_sparse({q}, cols))[0].score, joint[1] / (joint[0] + joint[1]));
  }

  // AUC against the O(n^2) pairwise count.
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    auto y = random_labels(rng, n, 0.3);
    y[0] = 1;
    y[1] = 0;
    std::vector<double> s(n);
    for (double& v : s) v = rng.bernoulli(0.5) ? static_cast<double>(rng.below(5)) / 5 : rng.uniform();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        den += 1;
        num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
    close(auc(s, y), num / den);
  }

  // Pearson and t-tests against their closed forms.
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-1, 1);
      b[i] = 0.5 * a[i] + rng.uniform(-1, 1);
    }
    const double nn = static_cast<double>(n);
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / nn;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nn;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < n; ++i) {
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
      sab += (a[i] - ma) * (b[i] - mb);
    }
    const double rho = sab / std::sqrt(saa * sbb);
    const auto c = pearson(a, b);
    close(c.rho, rho);
    close(c.p_two_sided, t_p_oracle(rho * std::sqrt((nn - 2) / (1 - rho * rho)), nn - 2));

    const double sp2 = (saa + sbb) / (2 * nn - 2);
    const double t2 = (ma - mb) / std::sqrt(sp2 * 2 / nn);
    const auto two = t_test(a, b, TTestMode::kTwoSample);
    close(two.t, t2);
    close(two.p_two_sided, t_p_oracle(t2, 2 * nn - 2));

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double md = std::accumulate(d.begin(), d.end(), 0.0) / nn;
    double sdd = 0;
    for (double v : d) sdd += (v - md) * (v - md);
    const double tp = md / std::sqrt(sdd / (nn - 1) / nn);
    const auto paired = t_test(a, b, TTestMode::kPaired);
    close(paired.t, tp);
    close(paired.p_two_sided, t_p_oracle(tp, nn - 1));
  }
  return {violations == 0,
          std::to_string(violations) + " violations; worst abs diff " + fmt("%.2e", worst)};
}

// --- 7 -----------------------------------------------------------------------

Outcome smote_properties() {
  Rng rng(7);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(12), dims = 1 + rng.below(8);
    std::vector<DenseRow> rows(n, DenseRow(dims));
    for (auto& r : rows) {
      for (double& v : r) v = rng.bernoulli(0.3) ? 0.0 : rng.uniform(-3, 3);
    }
    SmoteConfig cfg{1 + rng.below(n - 1), n + rng.below(40), rng.next_u64()};
    const auto out = smote(rows, cfg);
    if (out.size() != cfg.target - n) ++violations;
    if (smote(rows, cfg) != out) ++violations;
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) nbrs[i] = nearest_neighbors(rows, i, cfg.k_neighbors);
    for (const auto& s : out) {
      bool found = s.size() == dims;
      if (!found) {
        ++violations;
        continue;
      }
      found = false;
      for (std::size_t i = 0; i < n && !found; ++i) {
        for (std::size_t j : nbrs[i]) {
          bool inside = true;
          for (std::size_t d = 0; d < dims && inside; ++d) {
            inside = s[d] >= std::min(rows[i][d], rows[j][d]) && s[d] <= std::max(rows[i][d], rows[j][d]);
          }
          if (inside) {
            found = true;
            break;
          }
        }
      }
      if (!found) ++violations;
    }
  }
  return {violations == 0, "1000 trials, " + std::to_string(violations) + " violations"};
}

// --- 8 -----------------------------------------------------------------------

Outcome variant_invariants() {
  Rng rng(8);
  std::size_t violations = 0;
  std::size_t fd_drops = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto corpus = random_corpus(rng, 1 + rng.below(30));
    std::map<VariantId, DensityReport> c;
    std::map<VariantId, std::vector<FeatureSequence>> seqs;
    for (auto v : kAllVariants) {
      seqs[v] = derive_corpus(corpus, v);
      c[v] = feature_density(seqs[v]);
    }
    auto U = [&](VariantId v) { return c[v].unique_1grams; };
    auto A = [&](VariantId v) { return c[v].all_1grams; };
    using V = VariantId;
    const bool ok = A(V::kTokPos) == A(V::kTok) && A(V::kLemPos) == A(V::kLem) &&
                    A(V::kPos) == A(V::kTok) && U(V::kTokPos) >= U(V::kTok) &&
                    U(V::kLemPos) >= U(V::kLem) && U(V::kTokNer) <= U(V::kTok) &&
                    A(V::kTokNer) <= A(V::kTok) && A(V::kChnk) <= A(V::kTok) &&
                    A(V::kDep) == A(V::kChnk) && A(V::kChnkNer) <= A(V::kChnk) &&
                    U(V::kDep) >= U(V::kChnk);
    if (!ok) ++violations;

    // Punctuation removal: the total never grows, and FD moves up exactly
    // when U * p >= A * q (p, q: punctuation total and distinct count).
    for (auto v : {V::kTok, V::kLem, V::kTokNer, V::kLemNer}) {
      std::vector<FeatureSequence> stripped;
      std::set<std::string> punct;
      std::uint64_t p = 0, left = 0;
      for (const auto& s : seqs[v]) {
        stripped.push_back(strip_punct(s));
        left += stripped.back().features.size();
        for (std::size_t i = 0; i < s.features.size(); ++i) {
          if (s.from_punct[i]) {
            ++p;
            punct.insert(s.features[i]);
          }
        }
      }
      if (left == 0) continue;
      const auto after = feature_density(stripped);
      if (after.all_1grams > A(v)) ++violations;
      const bool rises = U(v) * p >= A(v) * punct.size();
      const bool went_up = after.unique_1grams * A(v) >= U(v) * after.all_1grams;
      if (rises != went_up) ++violations;
      if (!went_up) ++fd_drops;
    }
  }
  return {violations == 0, "500 fixtures, " + std::to_string(violations) +
                               " violations (punctuation removal lowered FD in " +
                               std::to_string(fd_drops) + " variant corpora, as predicted)"};
}

// --- 9 -----------------------------------------------------------------------

Outcome cv_hygiene() {
  Rng rng(9);
  std::size_t violations = 0;
  auto check_plan = [&](const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
    const auto plan = stratified_folds(y, k, seed);
    std::size_t pos_total = 0;
    for (int v : y) pos_total += v;
    std::vector<int> seen(y.size(), 0);
    for (std::size_t f = 0; f < k; ++f) {
      double pos = 0;
      for (auto i : plan.folds[f]) {
        ++seen[i];
        pos += y[i];
      }
      if (std::abs(pos - static_cast<double>(pos_total) / static_cast<double>(k)) > 1.0) ++violations;
      const auto tr = plan.train_indices(f);
      if (tr.size() + plan.folds[f].size() != y.size()) ++violations;
      std::set<std::size_t> test(plan.folds[f].begin(), plan.folds[f].end());
      for (auto i : tr) {
        if (test.count(i)) ++violations;
      }
    }
    for (int s : seen) {
      if (s != 1) ++violations;
    }
    return plan;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(9);
    auto y = exact_labels(k + rng.below(40), k + rng.below(200));
    rng.shuffle(y);
    check_plan(y, k, rng.next_u64());
  }
  std::set<std::size_t> published_counts;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto y = exact_labels(913, 11859);
    Rng(seed).shuffle(y);
    const auto plan = check_plan(y, 5, seed);
    for (const auto& fold : plan.folds) {
      std::size_t pos = 0;
      for (auto i : fold) pos += y[i];
      published_counts.insert(pos);
      if (pos != 182 && pos != 183) ++violations;
    }
  }
  // Vocabulary leakage: features seen only in a test fold never enter the
  // training vocabulary of that fold.
  std::size_t leaks = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto y = exact_labels(10, 30);
    rng.shuffle(y);
    auto docs = separable_docs(rng, y);
    const auto plan = stratified_folds(y, 5, rng.next_u64());
    for (std::size_t f = 0; f < 5; ++f) {
      auto d = docs;
      for (auto i : plan.folds[f]) {
        d[i].features.push_back("probe-" + std::to_string(i));
        d[i].from_punct.push_back(false);
      }
      const auto v = fold_vocabulary(d, plan, f);
      for (auto i : plan.folds[f]) {
        if (v.index_of("probe-" + std::to_string(i))) ++leaks;
      }
    }
  }
  std::string counts;
  for (auto c : published_counts) counts += " " + std::to_string(c);
  return {violations == 0 && leaks == 0, std::to_string(violations) + " fold violations, " +
                                             std::to_string(leaks) +
                                             " leaked features; 913/11859 fold positives:" + counts};
}

// --- 10 ----------------------------------------------------------------------

Outcome end_to_end() {
  const fs::path base = fs::temp_directory_path() / "fdbench_acceptance_e2e";
  fs::remove_all(base);
  auto config = ExperimentConfig::load(kSource / "data/toy/config.json");
  config.jobs = std::max(1u, std::thread::hardware_concurrency());

  config.out = base / "first";
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  const auto report = run_experiment(config, &s);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  config.out = base / "second";
  run_experiment(config);

  std::size_t differing = 0, files = 0;
  for (const auto& e : fs::directory_iterator(base / "first")) {
    if (!e.is_regular_file()) continue;
    ++files;
    if (slurp(e.path()) != slurp(base / "second" / e.path().filename())) ++differing;
  }

  const std::string md = slurp(base / "first" / "report.md");
  std::size_t missing = 0;
  for (const char* h : {"## Provenance", "## Corpus", "## Feature density", "## Feature density without punctuation",
                        "## Macro F1 without SMOTE", "## Accuracy without SMOTE",
                        "## Macro precision without SMOTE", "## Macro recall without SMOTE",
                        "## AUC without SMOTE", "## Macro F1 with SMOTE", "## Best classifier per variant",
                        "## Correlation of FD with macro F1", "## t-tests between the top three classifiers"}) {
    if (md.find(h) == std::string::npos) ++missing;
  }
  std::set<std::pair<VariantId, Family>> plain, smoted;
  for (const auto& e : report.grid) (e.smote ? smoted : plain).insert({e.variant, e.family});

  const bool pass = secs < 600 && differing == 0 && files >= 10 && missing == 0 &&
                    plain.size() == 88 && smoted.size() == 55;
  return {pass, std::to_string(s.cells_total) + " fold cells in " + fmt("%.0f s", secs) + "; " +
                    std::to_string(plain.size()) + " plain + " + std::to_string(smoted.size()) +
                    " SMOTE grid entries; " + std::to_string(missing) + " missing sections; " +
                    std::to_string(differing) + "/" + std::to_string(files) +
                    " files differ on same-seed rerun"};
}

// --- 11 ----------------------------------------------------------------------

Outcome classifier_sanity() {
  Rng rng(11);
  auto y = exact_labels(40, 160);
  rng.shuffle(y);
  const auto docs = separable_docs(rng, y);
  const auto plan = stratified_folds(y, 5, 11);
  std::string detail;
  bool pass = true;
  for (Family f : kAllFamilies) {
    ModelSpec spec{f, {}, 11};
    if (f == Family::kCNN1L || f == Family::kCNN2L) {
      // Same reduced geometry as the bundled toy configuration.
      spec.params.max_len = 32;
      spec.params.embed_dim = 16;
      spec.params.feature_maps = 16;
      spec.params.dense_units = 32;
      spec.params.batch_size = 16;
    }
    const double f1 = cross_validate(spec, docs, y, plan).mean.f1;
    detail += std::string(family_name(f)) + " " + fmt("%.3f", f1) + " ";
    pass = pass && f1 >= 0.95;
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"FD arithmetic anchors", fd_anchors},
      {"metric-convention anchor", metric_anchor},
      {"p-value anchors", p_anchors},
      {"correlation on published data", published_correlation},
      {"gradient checks", gradient_checks},
      {"oracle equivalence", oracles},
      {"SMOTE properties", smote_properties},
      {"variant count invariants", variant_invariants},
      {"CV hygiene", cv_hygiene},
      {"end-to-end smoke", end_to_end},
      {"classifier sanity", classifier_sanity},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
