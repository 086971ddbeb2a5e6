#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "nadv/models.hpp"

namespace nadv::testing {

inline Vector random_vector(Index k, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(k);
  for (Index i = 0; i < k; ++i) v[i] = n(rng);
  return v;
}

inline ScoringModel random_mlp(std::vector<Index> sizes, Rng& rng, double scale = 0.5) {
  MlpModel m = MlpModel::zeros(sizes);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& layer : m.layers) {
    for (Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = n(rng);
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = n(rng);
  }
  return ScoringModel(std::move(m));
}

inline ScoringModel linear_model(Vector w, double b) { return ScoringModel(LinearModel{std::move(w), b}); }

// Central finite-difference gradient of f at x.
template <class F>
Vector finite_difference(F f, const Vector& x, double h = 1e-4) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nadv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace nadv::testing
