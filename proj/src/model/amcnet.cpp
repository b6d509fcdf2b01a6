#include <algorithm>

#include "amc/model.hpp"
#include "amc/spectrum.hpp"

namespace amc {

std::string ModelConfig::class_name(std::size_t label) const {
    if (label < class_names.size()) return class_names[label];
    return "class" + std::to_string(label);
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
    auto all_positive = [](const std::vector<std::size_t>& v) {
        return std::all_of(v.begin(), v.end(), [](std::size_t d) { return d > 0; });
    };
    if (seq_len == 0) fail("seq_len must be positive");
    if (num_classes < 2) fail("num_classes must be at least 2");
    if (mlp_dims.size() != 3 || !all_positive(mlp_dims)) fail("mlp_dims needs three positive widths");
    if (mlp_dims.front() != seq_len || mlp_dims.back() != seq_len)
        fail("ACM MLP input and output widths must equal seq_len (" + std::to_string(seq_len) + ")");
    if (msm_filters_per_kernel == 0) fail("msm_filters_per_kernel must be positive");
    if (msm_kernel_lengths.empty() || !all_positive(msm_kernel_lengths)) fail("msm_kernel_lengths must be non-empty");
    for (std::size_t k : msm_kernel_lengths)
        if (k % 2 == 0) fail("MSM kernel lengths must be odd, got " + std::to_string(k));
    if (backbone_channels.empty() || !all_positive(backbone_channels)) fail("backbone_channels must be non-empty");
    if (heads == 0 || feature_channels() % heads != 0)
        fail("feature channels (" + std::to_string(feature_channels()) + ") not divisible by heads (" +
             std::to_string(heads) + ")");
    if (!all_positive(classifier_hidden)) fail("classifier widths must be positive");
    if (!class_names.empty() && class_names.size() != num_classes)
        fail("class_names has " + std::to_string(class_names.size()) + " entries for " +
             std::to_string(num_classes) + " classes");
}

std::size_t parameter_count(const ModelConfig& c) {
    std::size_t total = 0;
    if (c.use_acm) {
        std::size_t mlp = 0;
        for (std::size_t i = 0; i + 1 < c.mlp_dims.size(); ++i) mlp += c.mlp_dims[i] * c.mlp_dims[i + 1] + c.mlp_dims[i + 1];
        total += 2 * mlp;
    }
    if (c.use_msm) {
        for (std::size_t k : c.msm_kernel_lengths) total += c.msm_filters_per_kernel * (2 * k + 1);
        total += 2 * c.msm_channels();
    } else {
        total += c.msm_channels() * 2 + c.msm_channels();
    }
    std::size_t in = c.msm_channels();
    for (std::size_t out : c.backbone_channels) {
        total += out * in * 3 + out;
        in = out;
    }
    if (c.use_ffm) total += 3 * (in * in + in);
    for (std::size_t out : c.classifier_hidden) {
        total += out * in + out;
        in = out;
    }
    total += c.num_classes * in + c.num_classes;
    return total;
}

template <typename T>
AmcNet<T>::AmcNet(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto& c = config_;
    if (c.use_acm) {
        for (const char* part : {"re", "im"})
            for (std::size_t i = 0; i + 1 < c.mlp_dims.size(); ++i) {
                const std::string base = std::string("acm.") + part + ".fc" + std::to_string(i + 1);
                add_param(base + ".weight", {c.mlp_dims[i + 1], c.mlp_dims[i]});
                add_param(base + ".bias", {c.mlp_dims[i + 1]});
            }
    }
    if (c.use_msm) {
        for (std::size_t b = 0; b < c.msm_kernel_lengths.size(); ++b) {
            const std::string base = "msm.branch" + std::to_string(b + 1);
            add_param(base + ".kernel", {c.msm_filters_per_kernel, 1, 2, c.msm_kernel_lengths[b]});
            add_param(base + ".bias", {c.msm_filters_per_kernel});
            BasicTensor<T>& gamma = add_param(base + ".bn.gamma", {c.msm_filters_per_kernel});
            std::fill(gamma.values().begin(), gamma.values().end(), T(1));
            add_param(base + ".bn.beta", {c.msm_filters_per_kernel});
            msm_moments_.emplace_back(c.msm_filters_per_kernel);
        }
    } else {
        add_param("msm.lift.kernel", {c.msm_channels(), 1, 2, 1});
        add_param("msm.lift.bias", {c.msm_channels()});
    }
    std::size_t in = c.msm_channels();
    for (std::size_t i = 0; i < c.backbone_channels.size(); ++i) {
        const std::string base = "backbone.conv" + std::to_string(i + 1);
        add_param(base + ".kernel", {c.backbone_channels[i], in, 3});
        add_param(base + ".bias", {c.backbone_channels[i]});
        in = c.backbone_channels[i];
    }
    if (c.use_ffm) {
        for (const char* proj : {"q", "k", "v"}) {
            add_param(std::string("ffm.") + proj + ".weight", {in, in});
            add_param(std::string("ffm.") + proj + ".bias", {in});
        }
    }
    for (std::size_t i = 0; i <= c.classifier_hidden.size(); ++i) {
        const std::size_t out = i < c.classifier_hidden.size() ? c.classifier_hidden[i] : c.num_classes;
        const std::string base = "classifier.fc" + std::to_string(i + 1);
        add_param(base + ".weight", {out, in});
        add_param(base + ".bias", {out});
        in = out;
    }
}

template <typename T>
BasicTensor<T>& AmcNet<T>::add_param(const std::string& name, const Shape& shape) {
    params_.push_back({name, BasicTensor<T>::zeros(shape, true)});
    return params_.back().tensor;
}

template <typename T>
bool AmcNet<T>::has_parameter(const std::string& name) const {
    return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
}

template <typename T>
BasicTensor<T>& AmcNet<T>::parameter(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return p.tensor;
    throw std::out_of_range("no parameter named '" + name + "'");
}

template <typename T>
const BasicTensor<T>& AmcNet<T>::parameter(const std::string& name) const {
    return const_cast<AmcNet*>(this)->parameter(name);
}

template <typename T>
std::size_t AmcNet<T>::parameter_count() const {
    return parameter_count("");
}

template <typename T>
std::size_t AmcNet<T>::parameter_count(const std::string& prefix) const {
    std::size_t n = 0;
    for (const auto& p : params_)
        if (p.name.starts_with(prefix)) n += p.tensor.numel();
    return n;
}

template <typename T>
void AmcNet<T>::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
void AmcNet<T>::check_input(const BasicTensor<T>& x) const {
    if (x.rank() != 3 || x.dim(1) != 2 || x.dim(2) != config_.seq_len)
        throw DimensionError("model expects input [B x 2 x " + std::to_string(config_.seq_len) + "], got " +
                             shape_str(x.shape()));
}

template <typename T>
BasicTensor<T> AmcNet<T>::acm_forward(const BasicTensor<T>& x) {
    check_input(x);
    if (!config_.use_acm) throw ConfigError("acm_forward on a model built without ACM");
    auto spectrum = dft(x);
    auto gate = [&](const BasicTensor<T>& part, const char* which) {
        const std::string base = std::string("acm.") + which;
        auto h = relu(linear(part, parameter(base + ".fc1.weight"), parameter(base + ".fc1.bias")));
        auto g = tanh(linear(h, parameter(base + ".fc2.weight"), parameter(base + ".fc2.bias")));
        return mul(g, part);
    };
    SpectrumPair<T> corrected{gate(spectrum.real, "re"), gate(spectrum.imag, "im")};
    return add(x, idft(corrected));
}

template <typename T>
BasicTensor<T> AmcNet<T>::msm_branch(const BasicTensor<T>& x, std::size_t branch, BatchNormMode mode) {
    if (x.rank() != 3 || x.dim(1) != 2)
        throw DimensionError("MSM expects [B x 2 x L] input, got " + shape_str(x.shape()));
    if (!config_.use_msm) throw ConfigError("msm_branch on a model built without MSM");
    const std::size_t batch = x.dim(0), len = x.dim(2), filters = config_.msm_filters_per_kernel;
    const std::string base = "msm.branch" + std::to_string(branch + 1);
    auto conv = conv2d_iq(reshape(x, {batch, 1, 2, len}), parameter(base + ".kernel"), parameter(base + ".bias"));
    auto normed = batchnorm(conv, parameter(base + ".bn.gamma"), parameter(base + ".bn.beta"),
                            msm_moments_.at(branch), mode);
    return reshape(relu(normed), {batch, filters, len});
}

template <typename T>
BasicTensor<T> AmcNet<T>::msm_forward(const BasicTensor<T>& x, BatchNormMode mode) {
    std::vector<BasicTensor<T>> branches;
    for (std::size_t b = 0; b < config_.msm_kernel_lengths.size(); ++b) branches.push_back(msm_branch(x, b, mode));
    return concat_channels(branches);
}

template <typename T>
BasicTensor<T> AmcNet<T>::lift_forward(const BasicTensor<T>& x) {
    if (x.rank() != 3 || x.dim(1) != 2)
        throw DimensionError("lift expects [B x 2 x L] input, got " + shape_str(x.shape()));
    const std::size_t batch = x.dim(0), len = x.dim(2);
    auto lifted = conv2d_iq(reshape(x, {batch, 1, 2, len}), parameter("msm.lift.kernel"), parameter("msm.lift.bias"));
    return reshape(lifted, {batch, config_.msm_channels(), len});
}

template <typename T>
BasicTensor<T> AmcNet<T>::backbone_forward(const BasicTensor<T>& x) {
    if (x.rank() != 3 || x.dim(1) != config_.msm_channels())
        throw DimensionError("backbone expects [B x " + std::to_string(config_.msm_channels()) + " x L], got " +
                             shape_str(x.shape()));
    BasicTensor<T> h = x;
    for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) {
        const std::string base = "backbone.conv" + std::to_string(i + 1);
        h = relu(conv1d_same(h, parameter(base + ".kernel"), parameter(base + ".bias")));
    }
    return h;
}

template <typename T>
BasicTensor<T> AmcNet<T>::ffm_forward(const BasicTensor<T>& x) {
    const std::size_t channels = config_.feature_channels();
    if (x.rank() != 3 || x.dim(1) != channels)
        throw DimensionError("FFM expects [B x " + std::to_string(channels) + " x L], got " + shape_str(x.shape()));
    if (!config_.use_ffm) throw ConfigError("ffm_forward on a model built without FFM");
    const std::size_t batch = x.dim(0), len = x.dim(2), heads = config_.heads, dh = config_.head_dim();
    // Rows [i*dh, (i+1)*dh) of each projection belong to head i, so a reshape
    // to [(B*h) x dh x L] separates the heads and the inverse reshape concatenates them.
    auto project = [&](const char* which) {
        const std::string base = std::string("ffm.") + which;
        auto p = channel_project(x, parameter(base + ".weight"), parameter(base + ".bias"));
        return reshape(p, {batch * heads, dh, len});
    };
    auto fused = attention(project("q"), project("k"), project("v"));
    return add(x, reshape(fused, {batch, channels, len}));
}

template <typename T>
BasicTensor<T> AmcNet<T>::classify(const BasicTensor<T>& features) {
    if (features.rank() != 3 || features.dim(1) != config_.feature_channels())
        throw DimensionError("classifier expects [B x " + std::to_string(config_.feature_channels()) +
                             " x L], got " + shape_str(features.shape()));
    auto h = global_avg_pool(features);
    const std::size_t layers = config_.classifier_hidden.size() + 1;
    for (std::size_t i = 0; i < layers; ++i) {
        const std::string base = "classifier.fc" + std::to_string(i + 1);
        h = linear(h, parameter(base + ".weight"), parameter(base + ".bias"));
        if (i + 1 < layers) h = relu(h);
    }
    return h;
}

template <typename T>
BasicTensor<T> AmcNet<T>::forward(const BasicTensor<T>& x, BatchNormMode mode) {
    check_input(x);
    BasicTensor<T> h = config_.use_acm ? acm_forward(x) : x;
    h = config_.use_msm ? msm_forward(h, mode) : lift_forward(h);
    h = backbone_forward(h);
    if (config_.use_ffm) h = ffm_forward(h);
    return classify(h);
}

template <typename T>
StateDict<T> AmcNet<T>::state() const {
    StateDict<T> out;
    for (const auto& p : params_) out.push_back({p.name, p.tensor.detach()});
    for (std::size_t b = 0; b < msm_moments_.size(); ++b) {
        const std::string base = "msm.branch" + std::to_string(b + 1) + ".bn.";
        const auto& m = msm_moments_[b];
        out.push_back({base + "running_mean", BasicTensor<T>::from({m.mean.size()}, m.mean)});
        out.push_back({base + "running_var", BasicTensor<T>::from({m.var.size()}, m.var)});
    }
    return out;
}

template <typename T>
void AmcNet<T>::load_state(const StateDict<T>& state) {
    const StateDict<T> mine = this->state();
    if (state.size() != mine.size())
        throw ConfigError("state has " + std::to_string(state.size()) + " entries, model expects " +
                          std::to_string(mine.size()));
    for (const auto& entry : state) {
        auto it = std::find_if(mine.begin(), mine.end(), [&](const auto& m) { return m.name == entry.name; });
        if (it == mine.end()) throw ConfigError("unexpected state entry '" + entry.name + "'");
        if (it->tensor.shape() != entry.tensor.shape())
            throw DimensionError("state entry '" + entry.name + "' has shape " + shape_str(entry.tensor.shape()) +
                                 ", model expects " + shape_str(it->tensor.shape()));
    }
    for (const auto& entry : state) {
        auto src = entry.tensor.values();
        if (has_parameter(entry.name)) {
            auto dst = parameter(entry.name).values();
            std::copy(src.begin(), src.end(), dst.begin());
            continue;
        }
        for (std::size_t b = 0; b < msm_moments_.size(); ++b) {
            const std::string base = "msm.branch" + std::to_string(b + 1) + ".bn.";
            if (entry.name == base + "running_mean") std::copy(src.begin(), src.end(), msm_moments_[b].mean.begin());
            if (entry.name == base + "running_var") std::copy(src.begin(), src.end(), msm_moments_[b].var.begin());
        }
    }
}

template <typename T>
void AmcNet<T>::copy_matching_from(const AmcNet& other) {
    for (auto& p : params_) {
        if (!other.has_parameter(p.name)) continue;
        const auto& src = other.parameter(p.name);
        if (src.shape() != p.tensor.shape()) continue;
        std::copy(src.values().begin(), src.values().end(), p.tensor.values().begin());
    }
    if (other.msm_moments_.size() == msm_moments_.size()) msm_moments_ = other.msm_moments_;
}

template class AmcNet<float>;
template class AmcNet<double>;

}  // namespace amc
