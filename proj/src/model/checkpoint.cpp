#include "amc/checkpoint.hpp"

#include "../common/binary.hpp"

namespace amc {

namespace {

constexpr std::string_view kMagic = "AMCM";

void write_dims(detail::ByteWriter& w, const std::vector<std::size_t>& dims) {
    w.u8(static_cast<std::uint8_t>(dims.size()));
    for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
}

std::vector<std::size_t> read_dims(detail::ByteReader& r) {
    std::vector<std::size_t> dims(r.u8());
    for (auto& d : dims) d = r.u32();
    return dims;
}

void write_config(detail::ByteWriter& w, const ModelConfig& c) {
    w.u32(static_cast<std::uint32_t>(c.seq_len));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    write_dims(w, c.mlp_dims);
    w.u32(static_cast<std::uint32_t>(c.msm_filters_per_kernel));
    write_dims(w, c.msm_kernel_lengths);
    write_dims(w, c.backbone_channels);
    w.u32(static_cast<std::uint32_t>(c.heads));
    write_dims(w, c.classifier_hidden);
    w.u8(static_cast<std::uint8_t>((c.use_acm ? 1 : 0) | (c.use_msm ? 2 : 0) | (c.use_ffm ? 4 : 0)));
    w.u16(static_cast<std::uint16_t>(c.class_names.size()));
    for (const auto& name : c.class_names) w.str16(name);
}

ModelConfig read_config(detail::ByteReader& r) {
    ModelConfig c;
    c.seq_len = r.u32();
    c.num_classes = r.u32();
    c.mlp_dims = read_dims(r);
    c.msm_filters_per_kernel = r.u32();
    c.msm_kernel_lengths = read_dims(r);
    c.backbone_channels = read_dims(r);
    c.heads = r.u32();
    c.classifier_hidden = read_dims(r);
    const auto flags = r.u8();
    c.use_acm = flags & 1;
    c.use_msm = flags & 2;
    c.use_ffm = flags & 4;
    c.class_names.resize(r.u16());
    for (auto& name : c.class_names) name = r.str16();
    return c;
}

}  // namespace

std::string encode_checkpoint(const AmcNet<float>& model) {
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kCheckpointVersion);
    write_config(w, model.config());
    for (const auto& entry : model.state()) {
        w.str16(entry.name);
        const Shape& shape = entry.tensor.shape();
        w.u8(static_cast<std::uint8_t>(shape.size()));
        for (std::size_t d : shape) w.u32(static_cast<std::uint32_t>(d));
        for (float v : entry.tensor.values()) w.f32(v);
    }
    return w.data();
}

AmcNet<float> decode_checkpoint(const std::string& bytes) {
    detail::ByteReader r(bytes, "checkpoint");
    if (bytes.size() < 4 || r.bytes(4) != kMagic)
        throw FormatError(FormatError::Kind::bad_magic, "checkpoint: missing AMCM magic");
    const auto version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError(FormatError::Kind::bad_version,
                          "checkpoint: unsupported version " + std::to_string(version));
    ModelConfig config = read_config(r);
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw FormatError(FormatError::Kind::inconsistent, std::string("checkpoint: ") + e.what());
    }
    StateDict<float> state;
    while (!r.at_end()) {
        NamedTensor<float> entry;
        entry.name = r.str16();
        Shape shape(r.u8());
        for (auto& d : shape) d = r.u32();
        std::vector<float> values(shape_numel(shape));
        for (auto& v : values) v = r.f32();
        entry.tensor = Tensor::from(shape, std::move(values));
        state.push_back(std::move(entry));
    }
    AmcNet<float> model(config);
    try {
        model.load_state(state);
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::inconsistent, std::string("checkpoint: ") + e.what());
    }
    return model;
}

void save_checkpoint(const AmcNet<float>& model, const std::string& path) {
    detail::write_file(path, encode_checkpoint(model));
}

AmcNet<float> load_checkpoint(const std::string& path) {
    return decode_checkpoint(detail::read_file(path));
}

}  // namespace amc
