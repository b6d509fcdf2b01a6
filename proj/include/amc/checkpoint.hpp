// checkpoint.hpp - AMCM model checkpoint format
//
// Layout (little-endian):
//   "AMCM" | version u32 (=1) | model config block | tensors until end of file
// Config block:
//   seq_len u32 | num_classes u32 | mlp_dims (u8 n, n x u32) | msm_filters u32 |
//   msm_kernels (u8 n, n x u32) | backbone (u8 n, n x u32) | heads u32 |
//   classifier_hidden (u8 n, n x u32) | flags u8 (1 = ACM, 2 = MSM, 4 = FFM) |
//   class names (u16 n, n x (u16 len, utf-8))
// Tensor:
//   name length u16 | name utf-8 | rank u8 | dims u32 each | elements f32

#pragma once

#include <string>

#include "amc/model.hpp"

namespace amc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const AmcNet<float>& model);
AmcNet<float> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const AmcNet<float>& model, const std::string& path);
AmcNet<float> load_checkpoint(const std::string& path);

}  // namespace amc
