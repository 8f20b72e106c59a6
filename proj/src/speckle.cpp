#include "smae/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smae {

const char* noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gamma: return "gamma";
    case NoiseFamily::rayleigh: return "rayleigh";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::uniform: return "uniform";
  }
  return "unknown";
}

NoiseFamily noise_family_from_name(const std::string& name) {
  if (name == "gamma") return NoiseFamily::gamma;
  if (name == "rayleigh") return NoiseFamily::rayleigh;
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  throw ParamError("unknown noise family: " + name);
}

void NoisePolicy::validate_and_normalize() {
  if (apply_probability < 0.0 || apply_probability > 1.0) {
    throw ParamError("apply_probability must be in [0, 1]");
  }
  double sum = 0.0;
  for (double w : family_weights) {
    if (w < 0.0) throw ParamError("family weights must be nonnegative");
    sum += w;
  }
  if (sum <= 0.0) throw ParamError("family weights must not all be zero");
  for (double& w : family_weights) w /= sum;
  if (lsyn_choices.empty()) throw ParamError("lsyn_choices must not be empty");
  for (int l : lsyn_choices) {
    if (l <= 0) throw ParamError("lsyn_choices must be positive integers");
  }
  if (sigma_range.first > sigma_range.second || sigma_range.first < 0.0) {
    throw ParamError("sigma_range must be a well-ordered nonnegative interval");
  }
  if (alpha_range.first > alpha_range.second || alpha_range.first < 0.0) {
    throw ParamError("alpha_range must be a well-ordered nonnegative interval");
  }
}

std::string AugmentationRecord::to_json() const {
  std::ostringstream os;
  os << "{\"applied\":" << (applied ? "true" : "false");
  if (applied) {
    os << ",\"family\":\"" << noise_family_name(*family) << '"';
    if (lsyn) os << ",\"lsyn\":" << *lsyn;
    if (sigma) os << ",\"sigma\":" << *sigma;
    if (alpha) os << ",\"alpha\":" << *alpha;
    os << ",\"clipped\":" << (clipped ? "true" : "false");
  }
  os << ",\"rng_seed\":" << rng_seed << ",\"rng_stream\":" << rng_stream << "}";
  return os.str();
}

Image simulate_multilook(const Image& truth, int looks, RandomSource& rng) {
  if (looks <= 0) throw ParamError("simulate_multilook: looks must be positive");
  Image out(truth.height, truth.width, truth.channels);
  const double inv_l = 1.0 / static_cast<double>(looks);
  for (std::size_t i = 0; i < truth.pixels.size(); ++i) {
    double mean = truth.pixels[i];
    if (mean < 0.0) throw ParamError("simulate_multilook: negative input pixel");
    if (mean == 0.0) continue;  // Exp(0) degenerates to 0
    double acc = 0.0;
    for (int k = 0; k < looks; ++k) acc += rng.exponential(mean);
    out.pixels[i] = static_cast<float>(acc * inv_l);
  }
  return out;
}

double gamma_pdf(double z, double mean, int looks) {
  if (mean <= 0.0) throw ParamError("gamma_pdf: mean must be > 0");
  if (looks <= 0) throw ParamError("gamma_pdf: looks must be positive");
  if (z < 0.0) return 0.0;
  const double l = static_cast<double>(looks);
  if (z == 0.0) {
    // limit of z^(L-1): finite only for L = 1
    return looks == 1 ? 1.0 / mean : 0.0;
  }
  double log_pdf = l * std::log(l) - std::lgamma(l) - l * std::log(mean) +
                   (l - 1.0) * std::log(z) - l * z / mean;
  return std::exp(log_pdf);
}

Image sample_gamma_speckle(const Image& x, int lsyn, RandomSource& rng) {
  if (lsyn <= 0) throw ParamError("sample_gamma_speckle: lsyn must be positive");
  Image out(x.height, x.width, x.channels);
  const double shape = static_cast<double>(lsyn);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    double v = x.pixels[i];
    if (v < 0.0) throw ParamError("sample_gamma_speckle: negative input pixel");
    if (v == 0.0) continue;  // scale 0 degenerates to 0
    out.pixels[i] = static_cast<float>(rng.gamma(shape, v / shape));
  }
  return out;
}

Image sample_rayleigh_speckle(const Image& x, double sigma, RandomSource& rng) {
  if (sigma < 0.0) throw ParamError("sample_rayleigh_speckle: sigma must be >= 0");
  Image out(x.height, x.width, x.channels);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    out.pixels[i] = static_cast<float>(x.pixels[i] * rng.rayleigh(sigma));
  }
  return out;
}

Image sample_gaussian_noise(const Image& x, double sigma, RandomSource& rng) {
  if (sigma < 0.0) throw ParamError("sample_gaussian_noise: sigma must be >= 0");
  Image out(x.height, x.width, x.channels);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    out.pixels[i] = static_cast<float>(x.pixels[i] + sigma * rng.normal());
  }
  return out;
}

Image sample_uniform_noise(const Image& x, double alpha, RandomSource& rng) {
  if (alpha < 0.0) throw ParamError("sample_uniform_noise: alpha must be >= 0");
  Image out(x.height, x.width, x.channels);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    out.pixels[i] = static_cast<float>(x.pixels[i] + rng.uniform(-alpha, alpha));
  }
  return out;
}

namespace {

void clip_unit(Image& img) {
  for (float& p : img.pixels) p = std::clamp(p, 0.0f, 1.0f);
}

}  // namespace

std::pair<Image, AugmentationRecord> augment(const Image& x, const NoisePolicy& policy,
                                             RandomSource& rng) {
  AugmentationRecord rec;
  rec.rng_seed = rng.seed();
  rec.rng_stream = rng.stream();

  if (rng.uniform() >= policy.apply_probability) {
    return {x, rec};
  }
  rec.applied = true;

  double u = rng.uniform();
  std::size_t pick = policy.family_weights.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < policy.family_weights.size(); ++i) {
    cum += policy.family_weights[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  NoiseFamily family = static_cast<NoiseFamily>(pick);
  rec.family = family;

  Image out;
  switch (family) {
    case NoiseFamily::gamma: {
      int lsyn = policy.lsyn_choices[rng.uniform_index(policy.lsyn_choices.size())];
      rec.lsyn = lsyn;
      out = sample_gamma_speckle(x, lsyn, rng);
      break;
    }
    case NoiseFamily::rayleigh: {
      double sigma = rng.uniform(policy.sigma_range.first, policy.sigma_range.second);
      rec.sigma = sigma;
      out = sample_rayleigh_speckle(x, sigma, rng);
      break;
    }
    case NoiseFamily::gaussian: {
      double sigma = rng.uniform(policy.sigma_range.first, policy.sigma_range.second);
      rec.sigma = sigma;
      out = sample_gaussian_noise(x, sigma, rng);
      if (policy.clip_to_unit) {
        clip_unit(out);
        rec.clipped = true;
      }
      break;
    }
    case NoiseFamily::uniform: {
      double alpha = rng.uniform(policy.alpha_range.first, policy.alpha_range.second);
      rec.alpha = alpha;
      out = sample_uniform_noise(x, alpha, rng);
      if (policy.clip_to_unit) {
        clip_unit(out);
        rec.clipped = true;
      }
      break;
    }
  }
  return {std::move(out), rec};
}

double estimate_enl(const Image& region) {
  double mean = mean_pixel(region);
  double var = variance_pixel(region);
  if (var <= 0.0) {
    throw NumericError("estimate_enl: region variance is zero");
  }
  return mean * mean / var;
}

}  // namespace smae
