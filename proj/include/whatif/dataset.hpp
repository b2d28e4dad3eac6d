#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "whatif/building.hpp"

namespace whatif {

enum class ParamKind { Continuous, Integer };

struct ParameterSpec {
    std::string name;
    std::string unit;
    double min = 0;
    double max = 0;
    ParamKind kind = ParamKind::Continuous;

    bool contains(double v) const { return v >= min && v <= max; }
    friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

/// Throws ValidationError unless min < max, integer kinds have integral
/// bounds, and names are unique.
void validate_schema(const std::vector<ParameterSpec>& schema);

/// The 17 sampled design parameters with units and bounds.
std::vector<ParameterSpec> default_schema();

enum class ColumnRole { Sampled, Derived, Outcome };
std::string_view to_string(ColumnRole role);

struct ColumnInfo {
    std::string name;
    std::string unit;
    ColumnRole role = ColumnRole::Sampled;
    friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

/// Column layout of a generated building dataset: sampled parameters in
/// schema order, then Volume, External_Wall_Area, Window_Area, WWR, and
/// the Heating_Load outcome.
std::vector<ColumnInfo> building_columns(const std::vector<ParameterSpec>& schema = default_schema());

/// Immutable numeric table with a column schema.
class Dataset {
public:
    Dataset() = default;
    /// `bounds` lists the sampling ranges of the sampled columns; rows are
    /// checked against them. Throws ValidationError on shape mismatch,
    /// duplicate names, non-finite cells or out-of-bounds sampled values.
    Dataset(std::vector<ColumnInfo> columns, Eigen::MatrixXd values, std::uint64_t seed = 0,
            std::vector<ParameterSpec> bounds = {});

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return columns_.size(); }
    const std::vector<ColumnInfo>& columns() const noexcept { return columns_; }
    std::vector<std::string> names() const;
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<ParameterSpec>& bounds() const noexcept { return bounds_; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws ValidationError("unknown column ...").
    std::size_t index(std::string_view name) const;
    Eigen::VectorXd column(std::string_view name) const { return values_.col(static_cast<Eigen::Index>(index(name))); }
    const ParameterSpec* bound(std::string_view name) const;

    /// Rows selected by index, same schema.
    Dataset subset(const std::vector<std::size_t>& rows) const;

    /// Equal schema and cell values; the seed is provenance and is ignored.
    friend bool operator==(const Dataset& a, const Dataset& b);

private:
    std::vector<ColumnInfo> columns_;
    Eigen::MatrixXd values_;
    std::uint64_t seed_ = 0;
    std::vector<ParameterSpec> bounds_;
};

/// n independent uniform draws per schema column (uniform integers for
/// integer kinds) plus the latent shape factor. Deterministic in `seed`.
/// The schema must name exactly the BuildingConfig fields.
std::vector<BuildingConfig> sample_configs(const std::vector<ParameterSpec>& schema, std::size_t n,
                                           std::uint64_t seed);

inline constexpr double kMaxGeometryNoise = 0.05;

/// Samples configurations, derives geometry and the heating load, and
/// applies multiplicative Gaussian jitter of relative stddev `noise` to the
/// four derived columns. The outcome is computed from the exact geometry.
Dataset generate_dataset(const std::vector<ParameterSpec>& schema, std::size_t n, std::uint64_t seed,
                         double noise = 0.005, const OracleConstants& constants = {});

// --- CSV -------------------------------------------------------------------

/// Comma separated, dot decimal, header of column names, 17 significant
/// digits per cell.
void write_csv(const Dataset& ds, std::ostream& out);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// Strict reader: the header must be exactly the building column set (any
/// order). Errors name the missing/unexpected column or the row of a bad
/// cell.
Dataset read_csv(std::istream& in, const std::vector<ParameterSpec>& schema = default_schema());
Dataset load_csv(const std::filesystem::path& path, const std::vector<ParameterSpec>& schema = default_schema());

/// Lenient reader for arbitrary numeric tables; every column is reported as
/// Sampled without bounds.
Dataset read_csv_any(std::istream& in);
Dataset load_csv_any(const std::filesystem::path& path);

}  // namespace whatif
