#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "amc/datagen.hpp"
#include "amc/errors.hpp"

using namespace amc;

namespace {

double measured_snr_db(const ComplexSignal& clean, const ComplexSignal& noisy) {
    double s = 0, n = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        s += std::norm(clean[i]);
        n += std::norm(noisy[i] - clean[i]);
    }
    return 10 * std::log10(s / n);
}

// Little-endian AMCD bytes assembled field by field, independently of encode_dataset.
struct AmcdBuilder {
    std::string out;
    void u16(std::uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); }
    void i16(std::int16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); }
    void u32(std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
    void f32(float v) { out.append(reinterpret_cast<const char*>(&v), 4); }
};

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("amcnet_test_" + name);
}

}  // namespace

TEST_CASE("format table") {
    CHECK(all_formats().size() == 11);
    for (std::size_t i = 0; i < 11; ++i) CHECK(static_cast<std::size_t>(all_formats()[i]) == i);
    CHECK(format_name(ModulationFormat::psk8) == "8PSK");
    CHECK(format_name(ModulationFormat::am_ssb) == "AM-SSB");
    CHECK(parse_format("qpsk") == ModulationFormat::qpsk);
    CHECK(parse_format("AM-DSB") == ModulationFormat::am_dsb);
    CHECK(parse_format("amdsb") == ModulationFormat::am_dsb);
    CHECK(parse_format("wbfm") == ModulationFormat::wbfm);
    try {
        parse_format("OOK");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("QAM64") != std::string::npos);
    }
}

TEST_CASE("constellations") {
    for (auto p : constellation(ModulationFormat::bpsk)) {
        CHECK(std::abs(std::abs(p.real()) - 1.0) < 1e-15);
        CHECK(p.imag() == 0.0);
    }
    std::mt19937_64 rng(40);
    for (auto s : random_symbols(ModulationFormat::bpsk, 100, rng)) CHECK((s == std::complex<double>(1, 0) || s == std::complex<double>(-1, 0)));

    const double r = 1 / std::sqrt(2.0);
    for (auto p : constellation(ModulationFormat::qpsk)) {
        CHECK(std::abs(std::abs(p.real()) - r) < 1e-15);
        CHECK(std::abs(std::abs(p.imag()) - r) < 1e-15);
    }
    for (auto f : {ModulationFormat::psk8, ModulationFormat::qam16, ModulationFormat::qam64, ModulationFormat::pam4}) {
        double e = 0;
        const auto pts = constellation(f);
        for (auto p : pts) e += std::norm(p);
        CHECK(e / pts.size() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS(constellation(ModulationFormat::wbfm));
}

TEST_CASE("rrc taps energy") {
    const auto h = rrc_taps(8, 0.35, 8);
    CHECK(h.size() == 65);
    double e = 0;
    for (double t : h) e += t * t;
    CHECK(e == doctest::Approx(8.0).epsilon(1e-12));
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("modulated signals") {
    std::mt19937_64 rng(41);
    auto qpsk = modulate(ModulationFormat::qpsk, 10000, rng);
    CHECK(std::abs(average_power(qpsk) - 1.0) < 0.05);

    for (auto f : {ModulationFormat::cpfsk, ModulationFormat::gfsk, ModulationFormat::wbfm}) {
        for (auto s : modulate(f, 512, rng)) CHECK(std::abs(std::abs(s) - 1.0) < 1e-3);
    }
    for (auto f : all_formats()) {
        for (int trial = 0; trial < 5; ++trial) {
            auto s = modulate(f, 128, rng);
            CHECK(s.size() == 128);
            const double p = average_power(s);
            CHECK(p >= 0.9);
            CHECK(p <= 1.1);
            for (auto v : s) CHECK(std::isfinite(std::abs(v)));
        }
    }
    CHECK_THROWS_AS(modulate(ModulationFormat::bpsk, 16, rng), ConfigError);
}

TEST_CASE("channel identity, rotation and calibration") {
    std::mt19937_64 rng(42);
    auto sig = modulate(ModulationFormat::qam16, 256, rng);
    CHECK(apply_channel(sig, ChannelParams{}) == sig);

    ComplexSignal ones(200, {1.0, 0.0});
    ChannelParams cfo;
    cfo.cfo_norm = 0.01;
    auto rotated = apply_channel(ones, cfo);
    for (auto v : rotated) CHECK(std::abs(std::abs(v) - 1.0) < 1e-5);
    CHECK(std::arg(rotated[25]) == doctest::Approx(2 * std::numbers::pi * 0.01 * 25).epsilon(1e-9));

    auto probe = modulate(ModulationFormat::qpsk, 10000, rng);
    for (double target : {-10.0, 0.0, 10.0}) {
        ChannelParams p;
        p.snr_db = target;
        p.rng_seed = 7;
        CHECK(std::abs(measured_snr_db(probe, apply_channel(probe, p)) - target) < 0.5);
    }

    ChannelParams seeded;
    seeded.snr_db = 5;
    seeded.rng_seed = 99;
    CHECK(apply_channel(probe, seeded) == apply_channel(probe, seeded));

    ChannelParams sro;
    sro.sro_ppm = 500;
    auto ramp = ComplexSignal(100);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = {double(i), 0.0};
    auto resampled = apply_channel(ramp, sro);
    CHECK(resampled[50].real() == doctest::Approx(50 * (1 + 500e-6)).epsilon(1e-12));

    ChannelParams bad;
    bad.cfo_norm = 0.02;
    CHECK_THROWS_AS(apply_channel(sig, bad), ConfigError);
    bad = ChannelParams{};
    bad.sro_ppm = -600;
    CHECK_THROWS_AS(apply_channel(sig, bad), ConfigError);
}

TEST_CASE("generation counting and determinism") {
    GeneratorConfig g;
    g.formats = {ModulationFormat::qpsk, ModulationFormat::bpsk};
    g.snr_db = {0};
    g.per_class_per_snr = 5;
    g.seed = 3;
    const auto ds = generate_dataset(g);
    CHECK(ds.size() == 10);
    CHECK(ds.class_names == std::vector<std::string>{"BPSK", "QPSK"});
    CHECK(ds.count(0, 0) == 5);
    CHECK(ds.count(1, 0) == 5);
    CHECK(generate_dataset(g) == ds);

    GeneratorConfig threaded = g;
    threaded.threads = 3;
    CHECK(generate_dataset(threaded) == ds);

    GeneratorConfig other = g;
    other.seed = 4;
    CHECK_FALSE(generate_dataset(other) == ds);

    GeneratorConfig empty = g;
    empty.formats.clear();
    CHECK_THROWS_AS(generate_dataset(empty), ConfigError);
    GeneratorConfig zero = g;
    zero.per_class_per_snr = 0;
    CHECK_THROWS_AS(generate_dataset(zero), ConfigError);

    CHECK(default_snr_grid().size() == 20);
    CHECK(default_snr_grid().front() == -20);
    CHECK(default_snr_grid().back() == 18);
    // 11 formats x 20 SNRs x 1000 per cell, by the counting rule
    CHECK(all_formats().size() * default_snr_grid().size() * 1000 == 220000);
}

TEST_CASE("AMCD encode matches the byte layout") {
    Dataset ds;
    ds.class_names = {"BPSK", "AM-SSB"};
    ds.length = 4;
    for (int i = 0; i < 3; ++i) {
        SignalExample ex;
        ex.label = std::uint16_t(i % 2);
        ex.snr_db = std::int16_t(-4 + 2 * (i % 2));
        for (int k = 0; k < 8; ++k) ex.iq.push_back(0.25f * float(i * 8 + k) - 1.0f);
        ds.examples.push_back(ex);
    }
    const std::string bytes = encode_dataset(ds);
    CHECK(bytes.size() == 24 + (2 + 4) + (2 + 6) + 3 * (2 + 2 + 2 * 4 * 4));

    AmcdBuilder b;
    b.out = "AMCD";
    b.u32(1), b.u32(3), b.u32(4), b.u32(2), b.u32(2);
    for (const std::string name : {"BPSK", "AM-SSB"}) {
        b.u16(std::uint16_t(name.size()));
        b.out += name;
    }
    for (const auto& ex : ds.examples) {
        b.u16(ex.label), b.i16(ex.snr_db);
        for (float v : ex.iq) b.f32(v);
    }
    CHECK(bytes == b.out);
    CHECK(decode_dataset(b.out) == ds);
}

TEST_CASE("AMCD reader accepts externally produced files") {
    // what a converter would emit: canonical 11-class table, two examples
    AmcdBuilder b;
    b.out = "AMCD";
    b.u32(1), b.u32(2), b.u32(128), b.u32(11), b.u32(1);
    for (auto f : all_formats()) {
        const auto name = format_name(f);
        b.u16(std::uint16_t(name.size()));
        b.out += name;
    }
    std::vector<float> first;
    for (int ex = 0; ex < 2; ++ex) {
        b.u16(std::uint16_t(ex == 0 ? 10 : 5)), b.i16(18);
        for (int k = 0; k < 256; ++k) {
            const float v = std::sin(0.1f * float(k + ex)) * 0.01f;
            if (ex == 0) first.push_back(v);
            b.f32(v);
        }
    }
    const auto path = temp_path("external.amcd");
    {
        std::ofstream(path, std::ios::binary) << b.out;
    }
    const auto ds = read_dataset(path.string());
    CHECK(ds.size() == 2);
    CHECK(ds.class_names.size() == 11);
    CHECK(ds.class_names[0] == "8PSK");
    CHECK(ds.examples[0].label == 10);
    CHECK(ds.examples[0].snr_db == 18);
    CHECK(std::memcmp(ds.examples[0].iq.data(), first.data(), 256 * sizeof(float)) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("AMCD rejects malformed input with distinct errors") {
    GeneratorConfig g;
    g.formats = {ModulationFormat::bpsk, ModulationFormat::qpsk};
    g.snr_db = {0, 10};
    g.per_class_per_snr = 2;
    const std::string bytes = encode_dataset(generate_dataset(g));
    auto kind_of = [](const std::string& b) {
        try {
            decode_dataset(b);
        } catch (const FormatError& e) {
            return e.kind();
        }
        FAIL("expected FormatError");
        return FormatError::Kind::io;
    };
    std::string magic = bytes;
    magic[1] = 'X';
    CHECK(kind_of(magic) == FormatError::Kind::bad_magic);
    std::string version = bytes;
    version[4] = 2;
    CHECK(kind_of(version) == FormatError::Kind::bad_version);
    CHECK(kind_of(bytes.substr(0, bytes.size() - 1)) == FormatError::Kind::truncated);
    CHECK(kind_of(bytes.substr(0, 10)) == FormatError::Kind::truncated);
    std::string label = bytes;
    const std::size_t first_example = 24 + (2 + 4) + (2 + 4);
    label[first_example] = 7;
    CHECK(kind_of(label) == FormatError::Kind::bad_label);
    CHECK(kind_of(bytes + "x") == FormatError::Kind::inconsistent);
    CHECK_THROWS_AS(read_dataset(temp_path("does_not_exist.amcd").string()), FormatError);
}

TEST_CASE("file round trip") {
    GeneratorConfig g;
    g.formats = {ModulationFormat::gfsk, ModulationFormat::am_dsb};
    g.snr_db = {-6, 4};
    g.per_class_per_snr = 3;
    const auto ds = generate_dataset(g);
    const auto path = temp_path("roundtrip.amcd");
    write_dataset(ds, path.string());
    CHECK(read_dataset(path.string()) == ds);
    std::filesystem::remove(path);
}

TEST_CASE("stratified split") {
    GeneratorConfig g;
    g.formats = {ModulationFormat::bpsk, ModulationFormat::qpsk};
    g.snr_db = {0, 2};
    g.per_class_per_snr = 10;
    auto ds = generate_dataset(g);
    // shrink one cell to 7 and one to 3
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& ex = ds.examples[i];
        const std::size_t pos = i % 10;
        if (ex.label == 1 && ex.snr_db == 0 && pos >= 7) continue;
        if (ex.label == 1 && ex.snr_db == 2 && pos >= 3) continue;
        keep.push_back(i);
    }
    ds = subset(ds, keep);
    const auto split = split_dataset(ds, SplitRatios{}, 5);
    CHECK(split.train.count(0, 0) == 6);
    CHECK(split.val.count(0, 0) == 2);
    CHECK(split.test.count(0, 0) == 2);
    CHECK(split.train.count(1, 0) == 5);
    CHECK(split.val.count(1, 0) == 1);
    CHECK(split.test.count(1, 0) == 1);
    CHECK(split.train.count(1, 2) == 3);
    CHECK(split.val.count(1, 2) == 0);
    CHECK(split.warnings.size() == 1);

    std::multiset<std::size_t> all;
    for (auto* idx : {&split.train_indices, &split.val_indices, &split.test_indices}) all.insert(idx->begin(), idx->end());
    CHECK(all.size() == ds.size());
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == ds.size());
    for (std::size_t i = 0; i < split.val_indices.size(); ++i)
        CHECK(split.val.examples[i] == ds.examples[split.val_indices[i]]);

    const auto again = split_dataset(ds, SplitRatios{}, 5);
    CHECK(again.train_indices == split.train_indices);
    CHECK(again.test_indices == split.test_indices);
    const auto other = split_dataset(ds, SplitRatios{}, 6);
    CHECK(other.val_indices != split.val_indices);

    CHECK_THROWS_AS(split_dataset(ds, SplitRatios{0.5, 0.2, 0.2}, 1), ConfigError);
}

TEST_CASE("thread count from environment") {
    ::setenv("AMCNET_THREADS", "3", 1);
    CHECK(thread_count_from_env() == 3);
    ::setenv("AMCNET_THREADS", "0", 1);
    CHECK_THROWS_AS(thread_count_from_env(), ConfigError);
    ::unsetenv("AMCNET_THREADS");
    CHECK(thread_count_from_env() == 1);
}
