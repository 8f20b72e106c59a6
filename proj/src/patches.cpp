#include "smae/patches.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smae {

PatchSequence patchify(const Image& img, index_t patch_size) {
  if (patch_size <= 0 || img.height % patch_size != 0 || img.width % patch_size != 0) {
    throw ShapeError("patchify: patch size " + std::to_string(patch_size) +
                     " does not divide image " + std::to_string(img.height) + "x" +
                     std::to_string(img.width));
  }
  PatchSequence seq;
  seq.patch_size = patch_size;
  seq.grid_h = img.height / patch_size;
  seq.grid_w = img.width / patch_size;
  seq.channels = img.channels;
  const index_t dim = patch_size * patch_size * img.channels;
  seq.patches = Tensor<float>({seq.count(), dim});

  index_t row = 0;
  for (index_t gy = 0; gy < seq.grid_h; ++gy) {
    for (index_t gx = 0; gx < seq.grid_w; ++gx, ++row) {
      float* dst = seq.patches.data() + row * dim;
      for (index_t py = 0; py < patch_size; ++py) {
        for (index_t px = 0; px < patch_size; ++px) {
          for (index_t ch = 0; ch < img.channels; ++ch) {
            *dst++ = img.at(gy * patch_size + py, gx * patch_size + px, ch);
          }
        }
      }
    }
  }
  return seq;
}

Image unpatchify(const PatchSequence& seq) {
  return unpatchify(seq.patches, seq.patch_size, seq.grid_h, seq.grid_w, seq.channels);
}

Image unpatchify(const Tensor<float>& patches, index_t patch_size, index_t grid_h,
                 index_t grid_w, index_t channels) {
  const index_t dim = patch_size * patch_size * channels;
  if (patches.rank() != 2 || patches.rows() != grid_h * grid_w || patches.cols() != dim) {
    throw ShapeError("unpatchify: patches " + dims_to_string(patches.dims()) +
                     " inconsistent with grid " + std::to_string(grid_h) + "x" +
                     std::to_string(grid_w) + ", p=" + std::to_string(patch_size));
  }
  Image img(grid_h * patch_size, grid_w * patch_size, channels);
  index_t row = 0;
  for (index_t gy = 0; gy < grid_h; ++gy) {
    for (index_t gx = 0; gx < grid_w; ++gx, ++row) {
      const float* src = patches.data() + row * dim;
      for (index_t py = 0; py < patch_size; ++py) {
        for (index_t px = 0; px < patch_size; ++px) {
          for (index_t ch = 0; ch < channels; ++ch) {
            img.at(gy * patch_size + py, gx * patch_size + px, ch) = *src++;
          }
        }
      }
    }
  }
  return img;
}

MaskPlan random_mask(index_t patch_count, double ratio, RandomSource& rng) {
  if (patch_count <= 0) throw ParamError("random_mask: patch count must be positive");
  if (ratio < 0.0 || ratio >= 1.0) {
    throw ParamError("random_mask: ratio must be in [0, 1)");
  }
  // round half away from zero
  index_t visible_count =
      static_cast<index_t>(std::floor(static_cast<double>(patch_count) * (1.0 - ratio) + 0.5));
  if (visible_count < 1) {
    throw ParamError("random_mask: ratio " + std::to_string(ratio) + " leaves no visible patch");
  }
  visible_count = std::min(visible_count, patch_count);

  // partial Fisher-Yates: the first visible_count entries form the sample
  std::vector<index_t> perm(static_cast<std::size_t>(patch_count));
  std::iota(perm.begin(), perm.end(), index_t{0});
  for (index_t i = 0; i < visible_count; ++i) {
    index_t j = i + static_cast<index_t>(rng.uniform_index(
                        static_cast<std::size_t>(patch_count - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  MaskPlan plan;
  plan.ratio = ratio;
  plan.visible.assign(perm.begin(), perm.begin() + visible_count);
  plan.masked.assign(perm.begin() + visible_count, perm.end());
  std::sort(plan.visible.begin(), plan.visible.end());
  std::sort(plan.masked.begin(), plan.masked.end());
  return plan;
}

Tensor<float> gather_visible(const PatchSequence& seq, const MaskPlan& plan) {
  if (plan.total() != seq.count()) {
    throw ContractError("gather_visible: plan covers " + std::to_string(plan.total()) +
                        " patches, sequence has " + std::to_string(seq.count()));
  }
  const index_t dim = seq.patches.cols();
  Tensor<float> out({static_cast<index_t>(plan.visible.size()), dim});
  for (std::size_t i = 0; i < plan.visible.size(); ++i) {
    index_t idx = plan.visible[i];
    if (idx < 0 || idx >= seq.count()) {
      throw ContractError("gather_visible: index " + std::to_string(idx) + " out of range");
    }
    std::copy_n(seq.patches.data() + idx * dim, dim,
                out.data() + static_cast<index_t>(i) * dim);
  }
  return out;
}

}  // namespace smae
