#ifndef SMAE_IMAGE_HPP
#define SMAE_IMAGE_HPP

#include <cstdint>
#include <vector>

#include "smae/common.hpp"

namespace smae {

// Nonnegative intensity field, nominal range [0, 1], channel-interleaved
// row-major storage. 1 channel for raw SAR-style data, 3 after channel
// expansion.
struct Image {
  index_t height = 0;
  index_t width = 0;
  index_t channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(index_t h, index_t w, index_t c = 1);
  static Image constant(index_t h, index_t w, float v, index_t c = 1);

  index_t size() const { return static_cast<index_t>(pixels.size()); }

  float& at(index_t r, index_t c, index_t ch = 0) {
    return pixels[static_cast<std::size_t>((r * width + c) * channels + ch)];
  }
  float at(index_t r, index_t c, index_t ch = 0) const {
    return pixels[static_cast<std::size_t>((r * width + c) * channels + ch)];
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  // Throws ParamError on negative or non-finite pixels.
  void validate() const;
};

// Replicates a single channel three times. A 3-channel input is returned
// unchanged with a warning on stderr.
Image expand_channels(const Image& img);

// Mean across channels; inverse of expand_channels up to float rounding.
Image collapse_mean(const Image& img);

float mean_pixel(const Image& img);
float variance_pixel(const Image& img);

}  // namespace smae

#endif  // SMAE_IMAGE_HPP
