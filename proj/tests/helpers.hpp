#pragma once

#include <random>
#include <vector>

#include "qspsem/qsp.hpp"
#include "qspsem/synthesis.hpp"

namespace testing_util {

inline constexpr double kPi = 3.14159265358979323846;

inline qspsem::PhaseList random_list(std::mt19937_64& rng, std::size_t len, double band = kPi / 2) {
  std::uniform_real_distribution<double> u(-band, band);
  std::vector<double> v(len);
  for (auto& x : v) x = u(rng);
  return qspsem::PhaseList(v);
}

// Antisymmetric list of degree d with interior phases in (-band, band).
inline qspsem::PhaseList random_antisymmetric(std::mt19937_64& rng, int d, double band = 0.8) {
  std::uniform_real_distribution<double> u(-band, band);
  std::vector<double> half(static_cast<std::size_t>((d + 1) / 2));
  for (auto& x : half) x = u(rng);
  return qspsem::AntisymmetricPhaseList::from_half(half, d % 2 == 0).phases;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_util
