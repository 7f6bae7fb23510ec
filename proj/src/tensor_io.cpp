#include "uce/tensor_io.hpp"

#include "uce/embed_store.hpp"
#include "uce/errors.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

namespace uce {

namespace {

// Hard cap on elements per file; rejects headers that would overflow or
// request absurd allocations before any payload is read.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

class ByteWriter {
public:
    explicit ByteWriter(std::ostream& out) : out_(out) {}

    void bytes(const char* data, std::size_t n)
    {
        out_.write(data, static_cast<std::streamsize>(n));
        if (!out_)
            throw IoError("matrix write failed", offset_);
        offset_ += n;
    }

    template <typename UInt>
    void le(UInt v)
    {
        std::array<char, sizeof(UInt)> buf;
        for (std::size_t i = 0; i < sizeof(UInt); ++i)
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        bytes(buf.data(), buf.size());
    }

private:
    std::ostream& out_;
    std::uint64_t offset_ = 0;
};

class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {}

    // Returns false on short read; the caller picks the error kind.
    bool bytes(char* data, std::size_t n)
    {
        in_.read(data, static_cast<std::streamsize>(n));
        offset_ += static_cast<std::uint64_t>(in_.gcount());
        return static_cast<std::size_t>(in_.gcount()) == n;
    }

    template <typename UInt>
    bool le(UInt& v)
    {
        std::array<unsigned char, sizeof(UInt)> buf;
        if (!bytes(reinterpret_cast<char*>(buf.data()), buf.size()))
            return false;
        v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i)
            v |= static_cast<UInt>(buf[i]) << (8 * i);
        return true;
    }

    bool at_end() { return in_.peek() == std::istream::traits_type::eof(); }
    std::uint64_t offset() const { return offset_; }

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

} // namespace

std::string_view dtype_name(Dtype d)
{
    return d == Dtype::F32 ? "f32" : "f64";
}

void require_valid(const Matrix& m, std::string_view what)
{
    if (m.rows() < 1 || m.cols() < 1)
        throw ValidationError(std::string(what) + ": matrix must be at least 1x1");
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (!std::isfinite(m(r, c)))
                throw ValidationError(std::string(what) + ": non-finite entry at (" + std::to_string(r) + ", "
                                      + std::to_string(c) + ")");
}

void require_valid(const Vector& v, std::string_view what)
{
    if (v.size() < 1)
        throw ValidationError(std::string(what) + ": vector must have dim >= 1");
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)))
            throw ValidationError(std::string(what) + ": non-finite entry at index " + std::to_string(i));
}

void save_matrix(const Matrix& m, std::ostream& out, Dtype dtype)
{
    require_valid(m, "save_matrix");
    if (static_cast<std::uint64_t>(m.rows()) > std::numeric_limits<std::uint32_t>::max()
        || static_cast<std::uint64_t>(m.cols()) > std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("save_matrix: dimensions exceed u32");

    ByteWriter w(out);
    w.bytes(kMatrixMagic.data(), kMatrixMagic.size());
    w.le(static_cast<std::uint8_t>(dtype));
    w.le(static_cast<std::uint32_t>(m.rows()));
    w.le(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (dtype == Dtype::F64) {
                w.le(std::bit_cast<std::uint64_t>(m(r, c)));
            } else {
                const float f = static_cast<float>(m(r, c));
                if (!std::isfinite(f))
                    throw ValidationError("save_matrix: entry (" + std::to_string(r) + ", " + std::to_string(c)
                                          + ") overflows f32");
                w.le(std::bit_cast<std::uint32_t>(f));
            }
        }
    }
    out.flush();
    if (!out)
        throw IoError("matrix flush failed", kMatrixHeaderSize);
}

StoredMatrix load_stored_matrix(std::istream& in)
{
    ByteReader rd(in);
    std::array<char, 8> magic{};
    if (!rd.bytes(magic.data(), magic.size()) || std::string_view(magic.data(), magic.size()) != kMatrixMagic)
        throw FormatError("not a UCEMAT01 file (bad magic)");

    std::uint8_t dtype_byte = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    if (!rd.le(dtype_byte))
        throw CorruptFileError("truncated header");
    if (dtype_byte > 1)
        throw FormatError("unknown dtype byte " + std::to_string(dtype_byte));
    if (!rd.le(rows) || !rd.le(cols))
        throw CorruptFileError("truncated header");
    if (rows == 0 || cols == 0)
        throw CorruptFileError("zero dimension " + std::to_string(rows) + "x" + std::to_string(cols));
    const std::uint64_t count = std::uint64_t{rows} * cols;
    if (count > kMaxElements)
        throw CorruptFileError("declared size " + std::to_string(rows) + "x" + std::to_string(cols) + " too large");

    const auto dtype = static_cast<Dtype>(dtype_byte);
    Matrix m(rows, cols);
    for (std::uint64_t i = 0; i < count; ++i) {
        double value = 0.0;
        bool ok = false;
        if (dtype == Dtype::F64) {
            std::uint64_t bits = 0;
            ok = rd.le(bits);
            value = std::bit_cast<double>(bits);
        } else {
            std::uint32_t bits = 0;
            ok = rd.le(bits);
            value = static_cast<double>(std::bit_cast<float>(bits));
        }
        if (!ok)
            throw CorruptFileError("payload truncated: declared " + std::to_string(count) + " values, got "
                                   + std::to_string(i));
        if (!std::isfinite(value))
            throw ValidationError("non-finite entry at index " + std::to_string(i));
        m(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) = value;
    }
    if (!rd.at_end())
        throw CorruptFileError("trailing bytes after payload at offset " + std::to_string(rd.offset()));
    return {std::move(m), dtype};
}

Matrix load_matrix(std::istream& in)
{
    return load_stored_matrix(in).values;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string(), 0);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open " + tmp.string() + " for writing", 0);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.flush();
        if (!f)
            throw IoError("write failed for " + tmp.string(), 0);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string(), bytes.size());
    }
}

void save_matrix_file(const Matrix& m, const std::filesystem::path& path, Dtype dtype)
{
    std::ostringstream buf(std::ios::binary);
    save_matrix(m, buf, dtype);
    write_file_atomic(path, buf.str());
}

StoredMatrix load_matrix_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string(), 0);
    return load_stored_matrix(f);
}

void write_csv(const Matrix& m, std::ostream& out)
{
    char buf[40];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

EmbeddingCatalog load_catalog(std::istream& in)
{
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("catalog: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dim") || !doc["dim"].is_number_integer())
        throw ValidationError("catalog: missing integer field \"dim\"");
    const auto dim = doc["dim"].get<std::int64_t>();
    if (dim < 1)
        throw ValidationError("catalog: dim must be >= 1");
    if (!doc.contains("concepts") || !doc["concepts"].is_array())
        throw ValidationError("catalog: missing array field \"concepts\"");

    EmbeddingCatalog catalog(static_cast<std::size_t>(dim));
    for (const auto& entry : doc["concepts"]) {
        if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
            throw ValidationError("catalog: concept entry without a string \"name\"");
        Concept c;
        c.name = entry["name"].get<std::string>();
        if (!entry.contains("tokens") || !entry["tokens"].is_array())
            throw ValidationError("catalog: concept \"" + c.name + "\" has no \"tokens\" array");
        for (const auto& tok : entry["tokens"]) {
            if (!tok.is_array())
                throw ValidationError("catalog: concept \"" + c.name + "\" has a non-array token");
            if (tok.size() != static_cast<std::size_t>(dim))
                throw ValidationError("catalog: concept \"" + c.name + "\" has a token of dim "
                                      + std::to_string(tok.size()) + ", expected " + std::to_string(dim));
            Vector v(dim);
            for (std::size_t i = 0; i < tok.size(); ++i) {
                if (!tok[i].is_number())
                    throw ValidationError("catalog: concept \"" + c.name + "\" has a non-numeric entry");
                v(static_cast<Eigen::Index>(i)) = tok[i].get<double>();
            }
            c.tokens.push_back(std::move(v));
        }
        catalog.add(std::move(c));
    }
    return catalog;
}

EmbeddingCatalog load_catalog_file(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open " + path.string(), 0);
    return load_catalog(f);
}

void save_catalog(const EmbeddingCatalog& catalog, std::ostream& out)
{
    nlohmann::json doc;
    doc["dim"] = catalog.dim();
    doc["concepts"] = nlohmann::json::array();
    for (const auto& c : catalog.concepts()) {
        nlohmann::json tokens = nlohmann::json::array();
        for (const auto& t : c.tokens)
            tokens.push_back(std::vector<double>(t.data(), t.data() + t.size()));
        doc["concepts"].push_back({{"name", c.name}, {"tokens", std::move(tokens)}});
    }
    out << doc.dump(1) << '\n';
}

} // namespace uce
