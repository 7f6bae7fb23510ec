#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace uce {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class EmbeddingCatalog;

/// Element type tag stored in the file header. Memory is always f64.
enum class Dtype : std::uint8_t { F32 = 0, F64 = 1 };

std::string_view dtype_name(Dtype d);

/// Throws ValidationError unless m is non-empty and every entry is finite.
void require_valid(const Matrix& m, std::string_view what);
void require_valid(const Vector& v, std::string_view what);

/*
 * Binary matrix file, all integers little-endian:
 *
 *   offset  size  field
 *   0       8     magic "UCEMAT01"
 *   8       1     dtype (0 = f32, 1 = f64)
 *   9       4     rows (u32)
 *   13      4     cols (u32)
 *   17      n     rows*cols values, row-major, IEEE-754 LE
 *
 * Nothing may follow the payload.
 */
inline constexpr std::string_view kMatrixMagic = "UCEMAT01";
inline constexpr std::size_t kMatrixHeaderSize = 17;

void save_matrix(const Matrix& m, std::ostream& out, Dtype dtype = Dtype::F64);

struct StoredMatrix {
    Matrix values;
    Dtype dtype;
};

StoredMatrix load_stored_matrix(std::istream& in);
Matrix load_matrix(std::istream& in);

/// File wrappers. Saving goes through a sibling temp file and a rename.
void save_matrix_file(const Matrix& m, const std::filesystem::path& path, Dtype dtype = Dtype::F64);
StoredMatrix load_matrix_file(const std::filesystem::path& path);

/// Debug dump, 17 significant digits, one row per line.
void write_csv(const Matrix& m, std::ostream& out);

/// JSON catalog: { "dim": int, "concepts": [ { "name": str, "tokens": [[...], ...] } ] }
EmbeddingCatalog load_catalog(std::istream& in);
EmbeddingCatalog load_catalog_file(const std::filesystem::path& path);
void save_catalog(const EmbeddingCatalog& catalog, std::ostream& out);

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace uce
