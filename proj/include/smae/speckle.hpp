#ifndef SMAE_SPECKLE_HPP
#define SMAE_SPECKLE_HPP

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smae/image.hpp"
#include "smae/random.hpp"

namespace smae {

// Multiplicative speckle and the stochastic injection policy used during
// pretraining. All samplers are pure functions of (input, parameters, rng);
// intensity (not amplitude or dB) is the canonical pixel domain.

enum class NoiseFamily { gamma, rayleigh, gaussian, uniform };

const char* noise_family_name(NoiseFamily f);
NoiseFamily noise_family_from_name(const std::string& name);

struct NoisePolicy {
  double apply_probability = 0.5;
  // order: gamma, rayleigh, gaussian, uniform
  std::array<double, 4> family_weights = {0.25, 0.25, 0.25, 0.25};
  std::vector<int> lsyn_choices = {1, 2, 3, 4};
  std::pair<double, double> sigma_range = {0.0, 0.5};
  std::pair<double, double> alpha_range = {0.0, 0.5};
  bool clip_to_unit = true;  // applied after additive families only

  // Throws ParamError; weights are normalized to sum to 1.
  void validate_and_normalize();
};

struct AugmentationRecord {
  bool applied = false;
  std::optional<NoiseFamily> family;
  std::optional<double> sigma;   // rayleigh / gaussian
  std::optional<double> alpha;   // uniform
  std::optional<int> lsyn;       // gamma
  bool clipped = false;
  std::uint64_t rng_seed = 0;
  std::uint64_t rng_stream = 0;

  std::string to_json() const;
};

// Multi-look intensity formation: per pixel the average of L independent
// exponential draws whose mean is the true intensity. Pixels at 0 stay 0.
Image simulate_multilook(const Image& truth, int looks, RandomSource& rng);

// Density of the multi-look intensity at z for a given mean and look count,
// evaluated in log space.
double gamma_pdf(double z, double mean, int looks);

// Synthetic speckle injection: per pixel a draw from
// Gamma(shape = lsyn, scale = x / lsyn), which keeps E[x'] = x and sets
// Var[x'] = x^2 / lsyn.
Image sample_gamma_speckle(const Image& x, int lsyn, RandomSource& rng);

// x' = x * R(sigma), multiplicative Rayleigh factor per pixel.
Image sample_rayleigh_speckle(const Image& x, double sigma, RandomSource& rng);

// x' = x + N(0, sigma^2), additive per pixel (clipping is the policy's job).
Image sample_gaussian_noise(const Image& x, double sigma, RandomSource& rng);

// x' = x + U(-alpha, alpha), additive per pixel.
Image sample_uniform_noise(const Image& x, double alpha, RandomSource& rng);

// One stochastic corruption decision: with probability apply_probability pick
// a family by weight, sample its hyperparameter from the configured range or
// set, corrupt, and clip additive results to [0, 1] when the policy says so.
std::pair<Image, AugmentationRecord> augment(const Image& x, const NoisePolicy& policy,
                                             RandomSource& rng);

// Equivalent number of looks over a homogeneous region: mean^2 / variance.
// Throws NumericError when the region has zero variance.
double estimate_enl(const Image& region);

}  // namespace smae

#endif  // SMAE_SPECKLE_HPP
