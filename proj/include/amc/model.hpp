// model.hpp - AMC-Net: adaptive spectrum correction, multi-scale convolution,
// convolutional backbone, attention fusion and the pooled classifier.
//
//   x [B x 2 x L]
//     -> ACM       x + idft(tanh(mlp_re(Re X)) * Re X, tanh(mlp_im(Im X)) * Im X),  X = dft(x)
//     -> MSM       concat_k ReLU(BN(conv2d_iq_k(x))), k in {3, 5, 7}      [B x 36 x L]
//     -> backbone  3 x (conv1d_same + ReLU)                               [B x 256 x L]
//     -> FFM       f + concat_h attention(Wq_h f + bq_h, Wk_h f + bk_h, Wv_h f + bv_h)
//     -> classify  GAP -> 512 -> ReLU -> 256 -> ReLU -> num_classes
//
// Each of ACM / MSM / FFM can be switched off. Without ACM the signal passes
// through untouched, without MSM a learned 2x1 conv lifts I/Q to the same
// channel width, without FFM the backbone features go straight to the
// classifier.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "amc/ops.hpp"
#include "amc/tensor.hpp"

namespace amc {

struct ModelConfig {
    std::size_t seq_len = 128;
    std::size_t num_classes = 11;
    std::vector<std::size_t> mlp_dims{128, 48, 128};
    std::size_t msm_filters_per_kernel = 12;
    std::vector<std::size_t> msm_kernel_lengths{3, 5, 7};
    std::vector<std::size_t> backbone_channels{64, 128, 256};
    std::size_t heads = 2;
    std::vector<std::size_t> classifier_hidden{512, 256};
    bool use_acm = true;
    bool use_msm = true;
    bool use_ffm = true;
    // Optional display names, one per class; empty means "class<i>".
    std::vector<std::string> class_names;

    std::size_t msm_channels() const { return msm_filters_per_kernel * msm_kernel_lengths.size(); }
    std::size_t feature_channels() const { return backbone_channels.back(); }
    std::size_t head_dim() const { return feature_channels() / heads; }
    std::string class_name(std::size_t label) const;

    // Throws ConfigError on any violated invariant.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct NamedTensor {
    std::string name;
    BasicTensor<T> tensor;
};

// Parameter values plus BN running moments, keyed by name, in a fixed order.
template <typename T>
using StateDict = std::vector<NamedTensor<T>>;

template <typename T>
class AmcNet {
public:
    explicit AmcNet(ModelConfig config);

    const ModelConfig& config() const { return config_; }

    BasicTensor<T> forward(const BasicTensor<T>& x, BatchNormMode mode);

    // Module-level entry points (also used by forward).
    BasicTensor<T> acm_forward(const BasicTensor<T>& x);
    BasicTensor<T> msm_forward(const BasicTensor<T>& x, BatchNormMode mode);
    BasicTensor<T> msm_branch(const BasicTensor<T>& x, std::size_t branch, BatchNormMode mode);
    BasicTensor<T> lift_forward(const BasicTensor<T>& x);
    BasicTensor<T> backbone_forward(const BasicTensor<T>& x);
    BasicTensor<T> ffm_forward(const BasicTensor<T>& x);
    BasicTensor<T> classify(const BasicTensor<T>& features);

    // Learnable tensors (requires_grad = true), in registration order.
    std::vector<NamedTensor<T>>& parameters() { return params_; }
    const std::vector<NamedTensor<T>>& parameters() const { return params_; }
    BasicTensor<T>& parameter(const std::string& name);
    const BasicTensor<T>& parameter(const std::string& name) const;
    bool has_parameter(const std::string& name) const;

    std::vector<RunningMoments<T>>& msm_moments() { return msm_moments_; }

    // Number of learnable scalars (BN affine included, running moments excluded).
    std::size_t parameter_count() const;
    // Parameters whose name starts with `prefix`.
    std::size_t parameter_count(const std::string& prefix) const;

    void zero_grad();

    StateDict<T> state() const;
    // Copies every entry of `state` into this model. Names and shapes must match
    // exactly and every parameter must be covered.
    void load_state(const StateDict<T>& state);
    // Copies values of same-named, same-shaped parameters and moments from `other`.
    void copy_matching_from(const AmcNet& other);

private:
    BasicTensor<T>& add_param(const std::string& name, const Shape& shape);
    void check_input(const BasicTensor<T>& x) const;

    ModelConfig config_;
    std::vector<NamedTensor<T>> params_;
    std::vector<RunningMoments<T>> msm_moments_;
};

// Closed-form learnable-parameter count of a configuration.
std::size_t parameter_count(const ModelConfig& config);

}  // namespace amc
