#include "whatif/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "whatif/error.hpp"

namespace whatif {

void validate_schema(const std::vector<ParameterSpec>& schema) {
    std::set<std::string> seen;
    for (const auto& p : schema) {
        if (p.name.empty()) throw ValidationError("parameter with empty name");
        if (!seen.insert(p.name).second) throw ValidationError("duplicate parameter " + p.name);
        if (!(p.min < p.max)) throw ValidationError("parameter " + p.name + " requires min < max");
        if (p.kind == ParamKind::Integer && (std::floor(p.min) != p.min || std::floor(p.max) != p.max))
            throw ValidationError("integer parameter " + p.name + " requires integral bounds");
    }
}

std::vector<ParameterSpec> default_schema() {
    const std::string u = "W/m²K";
    return {
        {std::string(col::kGroundFloorArea), "m²", 250, 800, ParamKind::Continuous},
        {std::string(col::kHeight), "m", 3, 4, ParamKind::Continuous},
        {std::string(col::kNumberOfFloors), "-", 2, 5, ParamKind::Integer},
        {std::string(col::kUWall), u, 0.15, 0.25, ParamKind::Continuous},
        {std::string(col::kUInternalWall), u, 0.4, 0.6, ParamKind::Continuous},
        {std::string(col::kUGroundFloor), u, 0.15, 0.25, ParamKind::Continuous},
        {std::string(col::kURoof), u, 0.15, 0.25, ParamKind::Continuous},
        {std::string(col::kUInternalFloor), u, 0.4, 0.6, ParamKind::Continuous},
        {std::string(col::kUWindows), u, 0.7, 1.0, ParamKind::Continuous},
        {std::string(col::kGWindows), "-", 0.3, 0.6, ParamKind::Continuous},
        {std::string(col::kPermeability), "m³/m²h", 6, 9, ParamKind::Continuous},
        {std::string(col::kWwrNorth), "-", 0.1, 0.5, ParamKind::Continuous},
        {std::string(col::kWwrEast), "-", 0.1, 0.5, ParamKind::Continuous},
        {std::string(col::kWwrSouth), "-", 0.1, 0.5, ParamKind::Continuous},
        {std::string(col::kWwrWest), "-", 0.1, 0.5, ParamKind::Continuous},
        {std::string(col::kEquipmentGain), "W/m²", 10, 14, ParamKind::Continuous},
        // Published as "Person/m²"; read as floor area per occupant.
        {std::string(col::kOccupancy), "m²/person", 16, 24, ParamKind::Continuous},
    };
}

std::string_view to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::Sampled: return "sampled";
        case ColumnRole::Derived: return "derived";
        case ColumnRole::Outcome: return "outcome";
    }
    return "sampled";
}

std::vector<ColumnInfo> building_columns(const std::vector<ParameterSpec>& schema) {
    std::vector<ColumnInfo> out;
    for (const auto& p : schema) out.push_back({p.name, p.unit, ColumnRole::Sampled});
    out.push_back({std::string(col::kVolume), "m³", ColumnRole::Derived});
    out.push_back({std::string(col::kExternalWallArea), "m²", ColumnRole::Derived});
    out.push_back({std::string(col::kWindowArea), "m²", ColumnRole::Derived});
    out.push_back({std::string(col::kWwr), "-", ColumnRole::Derived});
    out.push_back({std::string(col::kHeatingLoad), "kWh/a", ColumnRole::Outcome});
    return out;
}

// --- Dataset ---------------------------------------------------------------

Dataset::Dataset(std::vector<ColumnInfo> columns, Eigen::MatrixXd values, std::uint64_t seed,
                 std::vector<ParameterSpec> bounds)
    : columns_(std::move(columns)), values_(std::move(values)), seed_(seed), bounds_(std::move(bounds)) {
    if (static_cast<std::size_t>(values_.cols()) != columns_.size()) {
        throw ValidationError("column count " + std::to_string(values_.cols()) + " does not match schema size " +
                              std::to_string(columns_.size()));
    }
    std::set<std::string> seen;
    for (const auto& c : columns_)
        if (!seen.insert(c.name).second) throw ValidationError("duplicate column " + c.name);
    if (!values_.allFinite()) throw ValidationError("dataset contains missing or non-finite values");
    for (const auto& b : bounds_) {
        auto j = find(b.name);
        if (!j) throw ValidationError("bounds given for unknown column " + b.name);
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!b.contains(values_(i, static_cast<Eigen::Index>(*j)))) {
                throw ValidationError("row " + std::to_string(i + 1) + ": " + b.name + " outside [" +
                                      std::to_string(b.min) + ", " + std::to_string(b.max) + "]");
            }
        }
    }
}

std::vector<std::string> Dataset::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].name == name) return j;
    return std::nullopt;
}

std::size_t Dataset::index(std::string_view name) const {
    if (auto j = find(name)) return *j;
    throw ValidationError("unknown column " + std::string(name));
}

const ParameterSpec* Dataset::bound(std::string_view name) const {
    for (const auto& b : bounds_)
        if (b.name == name) return &b;
    return nullptr;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    for (std::size_t r : rows)
        if (r >= this->rows()) throw ValidationError("row " + std::to_string(r) + " out of range");
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(rows[i]));
    Dataset out;
    out.columns_ = columns_;
    out.values_ = std::move(sub);
    out.seed_ = seed_;
    out.bounds_ = bounds_;
    return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
    return a.columns_ == b.columns_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
}

// --- generation ------------------------------------------------------------

std::vector<BuildingConfig> sample_configs(const std::vector<ParameterSpec>& schema, std::size_t n,
                                           std::uint64_t seed) {
    if (n == 0) throw ValidationError("sample count must be at least 1");
    validate_schema(schema);
    if (schema.size() != BuildingConfig::kFieldCount)
        throw ValidationError("schema must list all " + std::to_string(BuildingConfig::kFieldCount) +
                              " design parameters");
    for (const auto& p : schema)
        if (!BuildingConfig::has_field(p.name)) throw ValidationError("unknown column " + p.name);

    std::mt19937_64 rng(seed);
    std::vector<BuildingConfig> out(n);
    for (auto& cfg : out) {
        for (const auto& p : schema) {
            double v;
            if (p.kind == ParamKind::Integer) {
                std::uniform_int_distribution<long long> d(static_cast<long long>(p.min), static_cast<long long>(p.max));
                v = static_cast<double>(d(rng));
            } else {
                std::uniform_real_distribution<double> d(p.min, p.max);
                v = d(rng);
            }
            cfg.set(p.name, v);
        }
        std::uniform_real_distribution<double> shape(BuildingConfig::kShapeFactorMin, BuildingConfig::kShapeFactorMax);
        cfg.shape_factor = shape(rng);
    }
    return out;
}

Dataset generate_dataset(const std::vector<ParameterSpec>& schema, std::size_t n, std::uint64_t seed, double noise,
                         const OracleConstants& constants) {
    if (!(noise >= 0 && noise <= kMaxGeometryNoise))
        throw ValidationError("noise must lie in [0, 0.05]");
    constants.validate();
    const auto configs = sample_configs(schema, n, seed);
    const auto columns = building_columns(schema);
    const std::size_t p = schema.size();

    // Separate stream so the configurations match sample_configs(seed).
    std::seed_seq jitter_seed{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6a17u};
    std::mt19937_64 jitter_rng(jitter_seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    auto jittered = [&](double v) { return noise > 0 ? v * (1.0 + noise * jitter(jitter_rng)) : v; };

    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cfg = configs[i];
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < p; ++j) values(r, static_cast<Eigen::Index>(j)) = cfg.get(schema[j].name);
        const Geometry geo = derive_geometry(cfg);
        const auto q = static_cast<Eigen::Index>(p);
        values(r, q + 0) = jittered(geo.volume);
        values(r, q + 1) = jittered(geo.external_wall_area);
        values(r, q + 2) = jittered(geo.window_area);
        values(r, q + 3) = jittered(geo.wwr);
        values(r, q + 4) = heating_load(cfg, constants);
    }
    return Dataset(columns, std::move(values), seed, schema);
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

RawTable read_raw(std::istream& in) {
    RawTable t;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("CSV is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    t.header = split(line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw ValidationError("row " + std::to_string(row) + ": expected " + std::to_string(t.header.size()) +
                                  " cells, found " + std::to_string(cells.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto& c = cells[j];
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), values[j]);
            if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(values[j])) {
                throw ValidationError("row " + std::to_string(row) + ", column " + t.header[j] +
                                      ": non-numeric value '" + c + "'");
            }
        }
        t.rows.push_back(std::move(values));
    }
    return t;
}

}  // namespace

void write_csv(const Dataset& ds, std::ostream& out) {
    const auto& cols = ds.columns();
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j].name;
    out << "\n";
    const auto& v = ds.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) out << (j ? "," : "") << format_cell(v(i, j));
        out << "\n";
    }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    write_csv(ds, out);
    if (!out) throw ValidationError("failed writing " + path.string());
}

Dataset read_csv(std::istream& in, const std::vector<ParameterSpec>& schema) {
    RawTable t = read_raw(in);
    const auto declared = building_columns(schema);
    std::vector<std::size_t> source(declared.size());
    for (const auto& h : t.header) {
        bool known = false;
        for (const auto& d : declared) known = known || d.name == h;
        if (!known) throw ValidationError("unexpected column " + h);
    }
    for (std::size_t j = 0; j < declared.size(); ++j) {
        auto it = std::find(t.header.begin(), t.header.end(), declared[j].name);
        if (it == t.header.end()) throw ValidationError("missing column " + declared[j].name);
        source[j] = static_cast<std::size_t>(it - t.header.begin());
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(declared.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < declared.size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][source[j]];
    if (t.rows.empty()) throw ValidationError("CSV has no data rows");
    return Dataset(declared, std::move(values), 0, schema);
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<ParameterSpec>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_csv(in, schema);
}

Dataset read_csv_any(std::istream& in) {
    RawTable t = read_raw(in);
    if (t.rows.empty()) throw ValidationError("CSV has no data rows");
    std::vector<ColumnInfo> cols;
    for (const auto& h : t.header) {
        if (h.empty()) throw ValidationError("empty column name in header");
        cols.push_back({h, "", ColumnRole::Sampled});
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
    return Dataset(std::move(cols), std::move(values));
}

Dataset load_csv_any(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_csv_any(in);
}

}  // namespace whatif
