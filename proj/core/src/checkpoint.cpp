#include "errmax/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "errmax/error.hpp"

namespace errmax {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'E', 'R', 'R', 'M', 'A', 'X', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) fail(ErrorKind::Io, "truncated checkpoint " + path.string());
    return value;
}

void get_doubles(std::istream& in, double* dst, std::size_t n, const std::filesystem::path& path) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) fail(ErrorKind::Io, "truncated checkpoint " + path.string());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");

    const MlpModel& model = checkpoint.model;
    out.write(kMagic.data(), kMagic.size());
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(model.layer_dims().size()));
    for (int d : model.layer_dims()) put(out, static_cast<std::int32_t>(d));
    put(out, static_cast<std::uint64_t>(model.rng_seed()));
    put(out, std::uint32_t{0});
    put(out, std::uint32_t{1});
    const std::string meta = checkpoint.metadata.dump();
    put(out, static_cast<std::uint64_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        const auto& w = model.weights(k);
        const auto& b = model.biases(k);
        out.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path.string());

    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) fail(ErrorKind::Io, path.string() + " is not an errmax checkpoint");
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) fail(ErrorKind::Io, "unsupported checkpoint version " + std::to_string(version));

    const auto n_dims = get<std::uint32_t>(in, path);
    if (n_dims < 2 || n_dims > 4096) fail(ErrorKind::Io, "corrupt layer count in " + path.string());
    std::vector<int> dims(n_dims);
    for (auto& d : dims) d = get<std::int32_t>(in, path);
    const auto seed = get<std::uint64_t>(in, path);
    const auto hidden = get<std::uint32_t>(in, path);
    const auto output = get<std::uint32_t>(in, path);
    if (hidden != 0 || output != 1) fail(ErrorKind::Io, "unsupported activation kinds in " + path.string());

    const auto meta_len = get<std::uint64_t>(in, path);
    std::string meta(meta_len, '\0');
    in.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!in) fail(ErrorKind::Io, "truncated checkpoint " + path.string());

    Checkpoint ck;
    try {
        ck.metadata = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Io, "corrupt checkpoint metadata in " + path.string() + ": " + e.what());
    }
    ck.model = MlpModel(dims, seed);
    for (std::size_t k = 0; k < ck.model.num_layers(); ++k) {
        auto& w = ck.model.mutable_weights(k);
        auto& b = ck.model.mutable_biases(k);
        get_doubles(in, w.data(), static_cast<std::size_t>(w.size()), path);
        get_doubles(in, b.data(), static_cast<std::size_t>(b.size()), path);
    }
    if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::Io, "trailing bytes in " + path.string());
    return ck;
}

}  // namespace errmax
