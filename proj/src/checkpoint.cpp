/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/checkpoint.hpp"
#include "cidn/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

namespace cidn {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'C', 'I', 'D', 'N'};
constexpr uint8_t kDtypeFloat32 = 1;

uint64_t fnv1a(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    template <typename T>
    void pod(T v) {
        buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void raw(const void* p, size_t n) { buf_.append(static_cast<const char*>(p), n); }
    void name(const std::string& s) {
        if (s.size() > std::numeric_limits<uint16_t>::max())
            throw CheckpointError("container name too long: " + s.substr(0, 64));
        pod<uint16_t>(static_cast<uint16_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::string& str() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T pod(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view take(size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string name(const char* what) {
        auto n = pod<uint16_t>(what);
        return std::string(take(n, what));
    }
    size_t pos() const { return pos_; }

private:
    void need(size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
    }
    std::string_view bytes_;
    size_t pos_ = 0;
};

std::string moment_key(const char* group, const char* which, const std::string& name) {
    return std::string("adam.") + group + "." + which + "/" + name;
}

void write_bytes_atomic(const std::string& bytes, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

int64_t Container::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key)
            return v;
    throw CheckpointError("checkpoint header lacks field '" + key + "'");
}

const torch::Tensor* Container::array(const std::string& name) const {
    for (const auto& [k, v] : arrays)
        if (k == name)
            return &v;
    return nullptr;
}

std::string serialize(const Container& c) {
    Writer w;
    w.raw(kMagic, 4);
    w.pod<uint32_t>(kContainerVersion);
    w.pod<uint32_t>(static_cast<uint32_t>(c.metadata.size()));
    for (const auto& [k, v] : c.metadata) {
        w.name(k);
        w.pod<int64_t>(v);
    }
    w.pod<uint32_t>(static_cast<uint32_t>(c.arrays.size()));
    for (const auto& [name, t] : c.arrays) {
        auto data = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
        w.name(name);
        w.pod<uint8_t>(kDtypeFloat32);
        w.pod<uint8_t>(static_cast<uint8_t>(data.dim()));
        for (auto extent : data.sizes())
            w.pod<int64_t>(extent);
        w.raw(data.data_ptr<float>(), static_cast<size_t>(data.numel()) * sizeof(float));
    }
    w.pod<uint64_t>(fnv1a(w.str()));
    return std::move(w.str());
}

Container deserialize(std::string_view bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CheckpointError("not a CIDN checkpoint: bad magic (expected \"CIDN\" header)");
    if (bytes.size() < 16)
        throw CheckpointError("truncated checkpoint header");
    const auto body = bytes.substr(0, bytes.size() - sizeof(uint64_t));
    Reader r(body);
    r.take(4, "magic");
    const auto version = r.pod<uint32_t>("format version");
    if (version != kContainerVersion)
        throw CheckpointError("unsupported checkpoint format version " + std::to_string(version) + " (this build reads version " +
                              std::to_string(kContainerVersion) + ")");

    uint64_t stored;
    std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
    if (fnv1a(body) != stored)
        throw CheckpointError("checkpoint checksum mismatch (file corrupt or truncated), header version " +
                              std::to_string(version));

    Container c;
    const auto n_meta = r.pod<uint32_t>("metadata count");
    for (uint32_t i = 0; i < n_meta; ++i) {
        auto key = r.name("metadata key");
        c.metadata.emplace_back(std::move(key), r.pod<int64_t>("metadata value"));
    }
    const auto n_arrays = r.pod<uint32_t>("array count");
    for (uint32_t i = 0; i < n_arrays; ++i) {
        auto name = r.name("array name");
        if (r.pod<uint8_t>("dtype") != kDtypeFloat32)
            throw CheckpointError("array '" + name + "' has unsupported dtype");
        const auto rank = r.pod<uint8_t>("rank");
        std::vector<int64_t> dims(rank);
        int64_t numel = 1;
        for (auto& d : dims) {
            d = r.pod<int64_t>("extent");
            if (d < 0 || (d > 0 && numel > std::numeric_limits<int64_t>::max() / d))
                throw CheckpointError("array '" + name + "' has invalid extent");
            numel *= d;
        }
        auto data = r.take(static_cast<size_t>(numel) * sizeof(float), "array data");
        auto t = torch::empty(dims, torch::kFloat32);
        std::memcpy(t.data_ptr<float>(), data.data(), data.size());
        c.arrays.emplace_back(std::move(name), std::move(t));
    }
    if (r.pos() != body.size())
        throw CheckpointError("trailing bytes after checkpoint arrays");
    return c;
}

void write_container(const Container& container, const std::filesystem::path& path) {
    write_bytes_atomic(serialize(container), path);
}

Container read_container(const std::filesystem::path& path) {
    auto bytes = read_bytes(path);
    try {
        return deserialize(bytes);
    } catch (const CheckpointError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
}

std::string checkpoint_bytes(const ModelState& state) {
    Container c;
    const auto& a = state.arch();
    c.metadata = {
        {"kind", kKindModel},
        {"arch.base_channels", a.base_channels},
        {"arch.res_blocks", a.res_blocks},
        {"arch.disc_channels", a.disc_channels},
        {"arch.brightness_dim", ArchConfig::brightness_dim},
        {"arch.stride", ArchConfig::stride},
        {"arch.num_scales", ArchConfig::num_scales},
        {"step", state.step},
        {"seed", std::bit_cast<int64_t>(state.seed())},
    };
    c.arrays = state.all_parameters();
    auto add_moments = [&](const AdamMoments& m, const char* group) {
        for (const auto& [name, t] : m.first)
            c.arrays.emplace_back(moment_key(group, "m", name), t);
        for (const auto& [name, t] : m.second)
            c.arrays.emplace_back(moment_key(group, "v", name), t);
    };
    add_moments(state.adam_generator, "g");
    add_moments(state.adam_discriminator, "d");
    return serialize(c);
}

ModelState state_from_bytes(std::string_view bytes) {
    auto c = deserialize(bytes);
    if (c.meta("kind") != kKindModel)
        throw CheckpointError("container is not a model checkpoint (kind " + std::to_string(c.meta("kind")) + ")");
    if (c.meta("arch.brightness_dim") != ArchConfig::brightness_dim || c.meta("arch.stride") != ArchConfig::stride ||
        c.meta("arch.num_scales") != ArchConfig::num_scales)
        throw CheckpointError("checkpoint architecture constants differ from this build");

    ArchConfig arch;
    arch.base_channels = c.meta("arch.base_channels");
    arch.res_blocks = c.meta("arch.res_blocks");
    arch.disc_channels = c.meta("arch.disc_channels");
    try {
        arch.validate();
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("invalid architecture in checkpoint header: ") + e.what());
    }

    ModelState state(arch, std::bit_cast<uint64_t>(c.meta("seed")));
    state.step = c.meta("step");

    std::map<std::string, const torch::Tensor*> by_name;
    for (const auto& [name, t] : c.arrays)
        by_name.emplace(name, &t);

    torch::NoGradGuard no_grad;
    for (auto& [name, param] : state.all_parameters()) {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw CheckpointError("checkpoint lacks parameter '" + name + "'");
        if (it->second->sizes() != param.sizes())
            throw CheckpointError("parameter '" + name + "' has shape " + c10::str(it->second->sizes()) + ", expected " +
                                  c10::str(param.sizes()));
        param.copy_(*it->second);
    }
    for (const auto& [key, t] : c.arrays) {
        if (key.rfind("adam.", 0) != 0)
            continue;
        const auto slash = key.find('/');
        if (slash == std::string::npos || slash != 8)
            throw CheckpointError("malformed optimizer entry '" + key + "'");
        const auto group = key.substr(5, 1);
        const auto which = key.substr(7, 1);
        auto name = key.substr(slash + 1);
        auto& moments = group == "g" ? state.adam_generator : state.adam_discriminator;
        (which == "m" ? moments.first : moments.second)[name] = t.clone();
    }
    return state;
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
    write_bytes_atomic(checkpoint_bytes(state), path);
}

ModelState load_checkpoint(const std::filesystem::path& path) {
    auto bytes = read_bytes(path);
    try {
        return state_from_bytes(bytes);
    } catch (const CheckpointError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
}

std::string checkpoint_id(const std::filesystem::path& path, std::string_view bytes) {
    int64_t step = -1;
    try {
        step = deserialize(bytes).meta("step");
    } catch (const CheckpointError&) {
    }
    std::ostringstream os;
    os << path.stem().string() << "@" << step << ":" << std::hex << std::setw(8) << std::setfill('0')
       << (fnv1a(bytes) >> 32);
    return os.str();
}

} // namespace cidn
