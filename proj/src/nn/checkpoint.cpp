#include "mvtryon/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "mvtryon/errors.hpp"

namespace mvt::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'V', 'T', 'C'};

void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

class Reader {
   public:
    Reader(std::vector<char> bytes, std::string source) : bytes_(std::move(bytes)), source_(std::move(source)) {}

    bool done() const { return pos_ == bytes_.size(); }

    void take(void* dst, std::size_t n) {
        if (bytes_.size() - pos_ < n) throw FormatError(source_ + ": truncated at byte " + std::to_string(pos_));
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    std::uint32_t u32() {
        std::uint32_t v;
        take(&v, 4);
        return v;
    }

   private:
    std::vector<char> bytes_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_tensors(const std::map<std::string, Tensor>& tensors, const std::filesystem::path& path) {
    std::string buf(kMagic, 4);
    put_u32(buf, kCheckpointVersion);
    for (const auto& [name, t] : tensors) {
        put_u32(buf, static_cast<std::uint32_t>(name.size()));
        buf += name;
        put_u32(buf, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) put_u32(buf, static_cast<std::uint32_t>(d));
        buf.append(reinterpret_cast<const char*>(t.storage().data()), t.numel() * sizeof(double));
    }

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::map<std::string, Tensor> load_tensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());

    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));

    std::map<std::string, Tensor> out;
    while (!r.done()) {
        std::string name(r.u32(), '\0');
        r.take(name.data(), name.size());
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) throw FormatError(path.string() + ": bad rank for '" + name + "'");
        Shape shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = r.u32();
            if (d == 0) throw FormatError(path.string() + ": zero dimension in '" + name + "'");
            numel *= d;
        }
        std::vector<double> data(numel);
        r.take(data.data(), numel * sizeof(double));
        if (!out.emplace(name, Tensor(shape, std::move(data))).second)
            throw FormatError(path.string() + ": duplicate record '" + name + "'");
    }
    return out;
}

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
    std::map<std::string, Tensor> m;
    for (const auto& [name, t] : store) m.emplace(name, Tensor(t.shape(), t.storage()));
    save_tensors(m, path);
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
    ParamStore store;
    for (auto& [name, t] : load_tensors(path)) store.add(name, std::move(t));
    return store;
}

}  // namespace mvt::nn
