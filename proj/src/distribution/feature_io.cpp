#include "vstain/feature_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "vstain/errors.hpp"

namespace vstain {
namespace {


template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
    U bits;
    std::memcpy(&bits, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(std::uint8_t(bits >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool at_end() const { return pos_ == bytes_.size(); }

    void need(std::size_t count, const char* what) const {
        if (bytes_.size() - pos_ < count) throw Error(ErrorCode::TruncatedFile, std::string("truncated ") + what);
    }

    template <typename T>
    T get(const char* what) {
        need(sizeof(T), what);
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                     std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>>;
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) bits |= U(U(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, &bits, sizeof(T));
        return value;
    }

    std::string string(std::size_t len, const char* what) {
        need(len, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void put_string(std::vector<std::uint8_t>& out, const std::string& s, const char* what) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " longer than 65535 bytes");
    }
    put(out, std::uint16_t(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

std::vector<std::uint8_t> encode_features(const FeatureSet& fs) {
    if (fs.n() > std::numeric_limits<std::uint32_t>::max() || fs.d() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::InvalidArgument, "feature set too large for FEAT1");
    }
    std::vector<std::uint8_t> out{'F', 'E', 'A', 'T'};
    out.reserve(32 + fs.encoder_tag().size() + fs.data().size() * 4);
    put(out, kFeatVersion);
    put(out, std::uint32_t(fs.n()));
    put(out, std::uint32_t(fs.d()));
    put_string(out, fs.encoder_tag(), "encoder tag");
    for (float v : fs.data()) put(out, v);
    out.push_back(fs.has_ids() ? 1 : 0);
    for (const auto& id : fs.ids()) put_string(out, id, "id");
    return out;
}

FeatureSet decode_features(const std::vector<std::uint8_t>& bytes) {
    if (std::memcmp(bytes.data(), "FEAT", std::min<std::size_t>(bytes.size(), 4)) != 0)
        throw Error(ErrorCode::BadMagic, "not a FEAT1 file");
    if (bytes.size() < 4) throw Error(ErrorCode::TruncatedFile, "file shorter than magic");
    Reader r(bytes);
    r.string(4, "magic");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFeatVersion) {
        throw Error(ErrorCode::VersionUnsupported, "FEAT version " + std::to_string(version));
    }
    const auto n = r.get<std::uint32_t>("n");
    const auto d = r.get<std::uint32_t>("d");
    const auto tag_len = r.get<std::uint16_t>("tag length");
    std::string tag = r.string(tag_len, "encoder tag");

    const std::uint64_t count = std::uint64_t(n) * d;
    r.need(std::size_t(count) * 4, "feature payload");
    std::vector<float> data(count);
    for (auto& v : data) v = r.get<float>("feature payload");

    std::vector<std::string> ids;
    if (!r.at_end()) {
        const auto flag = r.get<std::uint8_t>("id flag");
        if (flag > 1) throw Error(ErrorCode::CorruptFile, "bad id flag");
        if (flag == 1) {
            ids.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                const auto len = r.get<std::uint16_t>("id length");
                ids.push_back(r.string(len, "id"));
            }
        }
        if (!r.at_end()) throw Error(ErrorCode::CorruptFile, "trailing bytes after FEAT1 payload");
    }
    try {
        return FeatureSet(n, d, std::move(data), std::move(tag), std::move(ids));
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptFile, e.what());
    }
}

FeatureSet read_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
    return decode_features(bytes);
}

void write_features(const std::filesystem::path& path, const FeatureSet& fs) {
    const auto bytes = encode_features(fs);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace vstain
