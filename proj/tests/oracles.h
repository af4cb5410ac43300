#pragma once

// Reference implementations used to check the library. They are written from
// the definitions directly and share no code with the implementations under
// test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Two passes over plain token lists: document frequencies first, then
// per-document counts. Returns word -> weight for the words with nonzero weight.
inline std::map<std::string, double> tfidf(const std::vector<std::vector<std::string>>& train_docs,
                                           const std::vector<std::string>& doc, bool length_normalized = true) {
  std::map<std::string, int> df;
  for (const auto& d : train_docs) {
    std::set<std::string> seen(d.begin(), d.end());
    for (const auto& w : seen) ++df[w];
  }
  std::map<std::string, int> counts;
  for (const auto& w : doc) ++counts[w];
  std::map<std::string, double> out;
  const double n = static_cast<double>(train_docs.size());
  for (const auto& [w, c] : counts) {
    const auto it = df.find(w);
    if (it == df.end()) continue;
    const double tf = length_normalized ? static_cast<double>(c) / static_cast<double>(doc.size()) : c;
    const double weight = tf * std::log(n / it->second);
    if (weight != 0.0) out[w] = weight;
  }
  return out;
}

// Fraction of (positive, negative) pairs ranked correctly, ties counting half.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

struct DenseSvd {
  std::vector<double> singular_values;  // descending
  Eigen::MatrixXd right_vectors;        // columns, same order
};

// Full decomposition through the eigen-decomposition of the Gram matrix A^T A.
inline DenseSvd svd_via_gram(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  DenseSvd out;
  const auto d = static_cast<Eigen::Index>(values.size());
  out.right_vectors.resize(a.cols(), d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = d - 1 - i;  // ascending -> descending
    out.singular_values.push_back(std::sqrt(std::max(values(src), 0.0)));
    out.right_vectors.col(i) = vectors.col(src);
  }
  return out;
}

struct StumpSplit {
  bool valid = false;
  std::size_t feature = 0;
  double gain = 0.0;
  std::vector<bool> goes_left;  // per row
  double left_value = 0.0;
  double right_value = 0.0;
};

// Exhaustive search for the best single split "x_f < next distinct value"
// under second-order gain, trying every feature and every cut between sorted
// distinct values. Ties keep the first candidate (lowest feature, lowest cut).
inline StumpSplit best_stump(const std::vector<std::vector<double>>& x, const std::vector<double>& g,
                             const std::vector<double>& h, double lambda, std::size_t min_rows,
                             double min_hessian, double learning_rate) {
  const std::size_t n = x.size();
  double gt = 0.0, ht = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gt += g[i];
    ht += h[i];
  }
  const auto score = [lambda](double gs, double hs) { return gs * gs / (hs + lambda); };
  StumpSplit best;
  for (std::size_t f = 0; f < x.front().size(); ++f) {
    std::set<double> values;
    for (const auto& row : x) values.insert(row[f]);
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      const double cut = *std::next(it);
      double gl = 0.0, hl = 0.0;
      std::size_t nl = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i][f] < cut) {
          gl += g[i];
          hl += h[i];
          ++nl;
        }
      }
      if (nl < min_rows || n - nl < min_rows) continue;
      const double gr = gt - gl, hr = ht - hl;
      if (hl < min_hessian || hr < min_hessian) continue;
      const double gain = score(gl, hl) + score(gr, hr) - score(gt, ht);
      if (gain > 0.0 && (!best.valid || gain > best.gain)) {
        best.valid = true;
        best.feature = f;
        best.gain = gain;
        best.goes_left.assign(n, false);
        for (std::size_t i = 0; i < n; ++i) best.goes_left[i] = x[i][f] < cut;
        best.left_value = -gl / (hl + lambda) * learning_rate;
        best.right_value = -gr / (hr + lambda) * learning_rate;
      }
    }
  }
  return best;
}

}  // namespace oracle
