#include "smae/image.hpp"

#include <cmath>
#include <cstdio>

namespace smae {

Image::Image(index_t h, index_t w, index_t c) : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
    throw ParamError("image dims must be positive with 1 or 3 channels");
  }
  pixels.assign(static_cast<std::size_t>(h * w * c), 0.0f);
}

Image Image::constant(index_t h, index_t w, float v, index_t c) {
  Image img(h, w, c);
  for (float& p : img.pixels) p = v;
  return img;
}

void Image::validate() const {
  for (float p : pixels) {
    if (!std::isfinite(p)) throw ParamError("image contains non-finite pixel");
    if (p < 0.0f) throw ParamError("image contains negative pixel");
  }
}

Image expand_channels(const Image& img) {
  if (img.channels == 3) {
    std::fprintf(stderr, "warning: expand_channels on 3-channel image is a no-op\n");
    return img;
  }
  Image out(img.height, img.width, 3);
  for (index_t i = 0; i < img.height * img.width; ++i) {
    float v = img.pixels[static_cast<std::size_t>(i)];
    out.pixels[static_cast<std::size_t>(3 * i + 0)] = v;
    out.pixels[static_cast<std::size_t>(3 * i + 1)] = v;
    out.pixels[static_cast<std::size_t>(3 * i + 2)] = v;
  }
  return out;
}

Image collapse_mean(const Image& img) {
  Image out(img.height, img.width, 1);
  for (index_t i = 0; i < img.height * img.width; ++i) {
    double s = 0;
    for (index_t ch = 0; ch < img.channels; ++ch) {
      s += img.pixels[static_cast<std::size_t>(i * img.channels + ch)];
    }
    out.pixels[static_cast<std::size_t>(i)] =
        static_cast<float>(s / static_cast<double>(img.channels));
  }
  return out;
}

float mean_pixel(const Image& img) {
  double s = 0;
  for (float p : img.pixels) s += p;
  return static_cast<float>(s / static_cast<double>(img.pixels.size()));
}

float variance_pixel(const Image& img) {
  double m = mean_pixel(img);
  double s = 0;
  for (float p : img.pixels) {
    double d = p - m;
    s += d * d;
  }
  return static_cast<float>(s / static_cast<double>(img.pixels.size()));
}

}  // namespace smae
