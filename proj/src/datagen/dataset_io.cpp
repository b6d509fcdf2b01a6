// AMCD layout (little-endian):
//   "AMCD" | version u32 | example_count u32 | L u32 | class_count u32 | snr_count u32
//   class_count x (u16 length, utf-8 name)
//   example_count x (label u16, snr_db i16, L x f32 I, L x f32 Q)

#include "amc/datagen.hpp"
#include "amc/errors.hpp"
#include "../common/binary.hpp"

namespace amc {

namespace {
constexpr std::string_view kMagic = "AMCD";
}

std::string encode_dataset(const Dataset& dataset) {
    dataset.validate();
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(dataset.examples.size()));
    w.u32(static_cast<std::uint32_t>(dataset.length));
    w.u32(static_cast<std::uint32_t>(dataset.class_names.size()));
    w.u32(static_cast<std::uint32_t>(dataset.snr_values().size()));
    for (const auto& name : dataset.class_names) w.str16(name);
    for (const auto& ex : dataset.examples) {
        w.u16(ex.label);
        w.i16(ex.snr_db);
        for (float v : ex.iq) w.f32(v);
    }
    return w.data();
}

Dataset decode_dataset(std::string_view bytes) {
    detail::ByteReader r(bytes, "dataset");
    if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw FormatError(FormatError::Kind::bad_magic, "dataset: missing AMCD magic");
    const auto version = r.u32();
    if (version != kDatasetVersion)
        throw FormatError(FormatError::Kind::bad_version, "dataset: unsupported version " + std::to_string(version));
    const auto count = r.u32();
    const auto length = r.u32();
    const auto classes = r.u32();
    const auto snr_count = r.u32();
    if (length == 0) throw FormatError(FormatError::Kind::inconsistent, "dataset: L must be positive");

    Dataset ds;
    ds.length = length;
    ds.class_names.resize(classes);
    for (auto& name : ds.class_names) name = r.str16();
    const std::size_t record = 4 + 8 * static_cast<std::size_t>(length);
    if (r.remaining() < record * count)
        throw FormatError(FormatError::Kind::truncated,
                          "dataset: truncated, header announces " + std::to_string(count) + " examples of " +
                              std::to_string(record) + " bytes but only " + std::to_string(r.remaining()) +
                              " bytes follow");
    ds.examples.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& ex = ds.examples[i];
        ex.label = r.u16();
        ex.snr_db = r.i16();
        if (ex.label >= classes)
            throw FormatError(FormatError::Kind::bad_label, "dataset: example " + std::to_string(i) + " has label " +
                                                                std::to_string(ex.label) + " >= class count " +
                                                                std::to_string(classes));
        ex.iq.resize(2 * static_cast<std::size_t>(length));
        for (auto& v : ex.iq) v = r.f32();
    }
    if (!r.at_end())
        throw FormatError(FormatError::Kind::inconsistent,
                          "dataset: " + std::to_string(r.remaining()) + " trailing bytes after the last example");
    if (ds.snr_values().size() != snr_count)
        throw FormatError(FormatError::Kind::inconsistent, "dataset: header announces " + std::to_string(snr_count) +
                                                               " SNR values, found " +
                                                               std::to_string(ds.snr_values().size()));
    ds.validate();
    return ds;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
    detail::write_file(path, encode_dataset(dataset));
}

Dataset read_dataset(const std::string& path) {
    return decode_dataset(detail::read_file(path));
}

}  // namespace amc
