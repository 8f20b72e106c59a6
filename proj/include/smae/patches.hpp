#ifndef SMAE_PATCHES_HPP
#define SMAE_PATCHES_HPP

#include <vector>

#include "smae/image.hpp"
#include "smae/random.hpp"
#include "smae/tensor.hpp"

namespace smae {

// Non-overlapping patch decomposition in raster order plus the visible/masked
// index bookkeeping used by the masked pretraining objectives.

struct PatchSequence {
  Tensor<float> patches;  // (N, p*p*channels), rows in raster order
  index_t patch_size = 0;
  index_t grid_h = 0;
  index_t grid_w = 0;
  index_t channels = 1;

  index_t count() const { return grid_h * grid_w; }
};

struct MaskPlan {
  std::vector<index_t> visible;  // sorted ascending
  std::vector<index_t> masked;   // sorted ascending
  double ratio = 0.0;

  index_t total() const {
    return static_cast<index_t>(visible.size() + masked.size());
  }
};

// p must divide both image dims; each patch flattens its p x p x C block
// row-major.
PatchSequence patchify(const Image& img, index_t patch_size);

// Exact inverse of patchify.
Image unpatchify(const PatchSequence& seq);

// Convenience for reassembling predicted patch rows into an image.
Image unpatchify(const Tensor<float>& patches, index_t patch_size, index_t grid_h,
                 index_t grid_w, index_t channels);

// Uniformly random visible/masked partition. The visible count is
// round(N * (1 - ratio)) with round-half-away-from-zero and must be >= 1.
MaskPlan random_mask(index_t patch_count, double ratio, RandomSource& rng);

// Rows of `seq` at the plan's visible indices, ascending.
Tensor<float> gather_visible(const PatchSequence& seq, const MaskPlan& plan);

}  // namespace smae

#endif  // SMAE_PATCHES_HPP
