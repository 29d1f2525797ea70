#include "pranet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pranet/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace pranet {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

constexpr char kMagic[4] = {'P', 'R', 'N', 'T'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T take(std::istream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw IoError(std::string("checkpoint truncated while reading ") + what);
    return v;
}

std::string take_string(std::istream& is, std::uint32_t len, const char* what) {
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw IoError(std::string("checkpoint truncated while reading ") + what);
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const RunConfig& config, std::uint64_t training_log_digest) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint " + path);

    os.write(kMagic, 4);
    put<std::uint32_t>(os, Checkpoint::kFormatVersion);

    const std::string cfg_json = config.to_json();
    put<std::uint64_t>(os, cfg_json.size());
    os.write(cfg_json.data(), static_cast<std::streamsize>(cfg_json.size()));

    const auto& entries = params.entries();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(entries.size()));
    std::uint64_t offset = 0;
    for (const auto& [name, t] : entries) {
        put_string(os, name);
        put<std::int32_t>(os, t->shape.n);
        put<std::int32_t>(os, t->shape.c);
        put<std::int32_t>(os, t->shape.h);
        put<std::int32_t>(os, t->shape.w);
        put<std::uint64_t>(os, offset);
        offset += t->v.size() * sizeof(float);
    }

    put<std::uint64_t>(os, offset);
    for (const auto& [name, t] : entries)
        os.write(reinterpret_cast<const char*>(t->v.data()),
                 static_cast<std::streamsize>(t->v.size() * sizeof(float)));

    put<std::uint64_t>(os, training_log_digest);
    if (!os) throw IoError("failed while writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw UnsupportedCheckpoint(path + " is not a checkpoint (bad magic)");

    Checkpoint ck;
    ck.format_version = take<std::uint32_t>(is, "version");
    if (ck.format_version != Checkpoint::kFormatVersion)
        throw UnsupportedCheckpoint("unsupported checkpoint format version " +
                                    std::to_string(ck.format_version));

    const auto cfg_len = take<std::uint64_t>(is, "config length");
    ck.config = RunConfig::from_json_text(
        take_string(is, static_cast<std::uint32_t>(cfg_len), "config"));

    const auto count = take<std::uint32_t>(is, "manifest count");
    ck.manifest.resize(count);
    for (auto& e : ck.manifest) {
        const auto name_len = take<std::uint32_t>(is, "name length");
        e.path = take_string(is, name_len, "name");
        e.shape.n = take<std::int32_t>(is, "shape");
        e.shape.c = take<std::int32_t>(is, "shape");
        e.shape.h = take<std::int32_t>(is, "shape");
        e.shape.w = take<std::int32_t>(is, "shape");
        e.byte_offset = take<std::uint64_t>(is, "offset");
    }

    const auto payload_bytes = take<std::uint64_t>(is, "payload size");
    if (payload_bytes % sizeof(float) != 0)
        throw UnsupportedCheckpoint("payload size is not a multiple of 4");
    ck.payload.resize(payload_bytes / sizeof(float));
    is.read(reinterpret_cast<char*>(ck.payload.data()),
            static_cast<std::streamsize>(payload_bytes));
    if (!is) throw IoError("checkpoint truncated while reading payload");

    ck.training_log_digest = take<std::uint64_t>(is, "digest");
    return ck;
}

ParamStore<float> params_from_checkpoint(const Checkpoint& ck) {
    ParamStore<float> params = init_params<float>(ck.config.model, ck.config.seed);
    const auto& entries = params.entries();
    if (entries.size() != ck.manifest.size())
        throw UnsupportedCheckpoint("manifest does not match the checkpoint's own config");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& [name, t] = entries[i];
        const auto& e = ck.manifest[i];
        if (e.path != name || !(e.shape == t->shape))
            throw UnsupportedCheckpoint("manifest entry " + e.path +
                                        " does not match the expected parameter " + name);
        if (e.byte_offset % sizeof(float) != 0 ||
            e.byte_offset / sizeof(float) + t->v.size() > ck.payload.size())
            throw UnsupportedCheckpoint("manifest offset out of range for " + e.path);
        const float* src = ck.payload.data() + e.byte_offset / sizeof(float);
        std::copy(src, src + t->v.size(), t->v.begin());
    }
    return params;
}

}  // namespace pranet
