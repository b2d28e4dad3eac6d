#include "whatif/building.hpp"

#include <algorithm>
#include <cmath>

#include "whatif/error.hpp"

namespace whatif {

namespace {

using Member = double BuildingConfig::*;

struct Field {
    std::string_view name;
    Member member;
};

constexpr std::array<Field, BuildingConfig::kFieldCount> kFields{{
    {col::kGroundFloorArea, &BuildingConfig::ground_floor_area},
    {col::kHeight, &BuildingConfig::height},
    {col::kNumberOfFloors, &BuildingConfig::number_of_floors},
    {col::kUWall, &BuildingConfig::u_wall},
    {col::kUInternalWall, &BuildingConfig::u_internal_wall},
    {col::kUGroundFloor, &BuildingConfig::u_ground_floor},
    {col::kURoof, &BuildingConfig::u_roof},
    {col::kUInternalFloor, &BuildingConfig::u_internal_floor},
    {col::kUWindows, &BuildingConfig::u_windows},
    {col::kGWindows, &BuildingConfig::g_windows},
    {col::kPermeability, &BuildingConfig::permeability},
    {col::kWwrNorth, &BuildingConfig::wwr_north},
    {col::kWwrEast, &BuildingConfig::wwr_east},
    {col::kWwrSouth, &BuildingConfig::wwr_south},
    {col::kWwrWest, &BuildingConfig::wwr_west},
    {col::kEquipmentGain, &BuildingConfig::equipment_gain},
    {col::kOccupancy, &BuildingConfig::occupancy},
}};

Member member_of(std::string_view column) {
    for (const auto& f : kFields)
        if (f.name == column) return f.member;
    throw ValidationError("unknown column " + std::string(column));
}

void require_positive(double v, std::string_view what) {
    if (!(v > 0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive, got " + std::to_string(v));
    }
}

}  // namespace

double BuildingConfig::get(std::string_view column) const { return this->*member_of(column); }

void BuildingConfig::set(std::string_view column, double value) { this->*member_of(column) = value; }

bool BuildingConfig::has_field(std::string_view column) {
    return std::any_of(kFields.begin(), kFields.end(), [&](const Field& f) { return f.name == column; });
}

const std::array<std::string_view, BuildingConfig::kFieldCount>& BuildingConfig::field_names() {
    static const auto names = [] {
        std::array<std::string_view, kFieldCount> out{};
        for (std::size_t i = 0; i < kFieldCount; ++i) out[i] = kFields[i].name;
        return out;
    }();
    return names;
}

void OracleConstants::validate() const {
    const std::array<std::pair<double, std::string_view>, 10> all{{
        {degree_hours, "degree_hours"},
        {infiltration_factor, "infiltration_factor"},
        {permeability_divisor, "permeability_divisor"},
        {irradiation_south, "irradiation_south"},
        {irradiation_east_west, "irradiation_east_west"},
        {irradiation_north, "irradiation_north"},
        {occupant_heat_output, "occupant_heat_output"},
        {gain_utilization, "gain_utilization"},
        {operating_hours, "operating_hours"},
        {light_heat_gain, "light_heat_gain"},
    }};
    for (const auto& [v, name] : all) {
        if (!(v > 0) || !std::isfinite(v)) throw ValidationError("oracle constant " + std::string(name) + " must be positive");
    }
    if (gain_utilization > 1) throw ValidationError("oracle constant gain_utilization must be <= 1");
    if (!(irradiation_south > irradiation_east_west && irradiation_south > irradiation_north))
        throw ValidationError("south irradiation must be the largest");
}

Geometry derive_geometry(const BuildingConfig& cfg) {
    require_positive(cfg.ground_floor_area, col::kGroundFloorArea);
    require_positive(cfg.height, col::kHeight);
    require_positive(cfg.number_of_floors, col::kNumberOfFloors);
    require_positive(cfg.shape_factor, "shape_factor");
    for (double w : {cfg.wwr_north, cfg.wwr_east, cfg.wwr_south, cfg.wwr_west}) {
        if (!(w >= 0 && w <= 1)) throw DomainError("window-to-wall ratio must lie in [0, 1]");
    }
    Geometry g;
    g.volume = cfg.ground_floor_area * cfg.height * cfg.number_of_floors;
    g.gross_wall = cfg.shape_factor * std::sqrt(cfg.ground_floor_area) * cfg.height * cfg.number_of_floors;
    g.wwr = (cfg.wwr_north + cfg.wwr_east + cfg.wwr_south + cfg.wwr_west) / 4.0;
    g.window_area = g.wwr * g.gross_wall;
    g.external_wall_area = g.gross_wall - g.window_area;
    return g;
}

double heating_load(const BuildingConfig& cfg, const OracleConstants& k) {
    const Geometry geo = derive_geometry(cfg);
    require_positive(cfg.occupancy, col::kOccupancy);
    require_positive(cfg.permeability, col::kPermeability);
    for (double u : {cfg.u_wall, cfg.u_windows, cfg.u_roof, cfg.u_ground_floor, cfg.g_windows,
                     cfg.equipment_gain}) {
        if (!(u >= 0) || !std::isfinite(u)) throw DomainError("thermal properties and gains must be non-negative");
    }

    // Transmission and ventilation conductances, W/K.
    const double h_tr = cfg.u_wall * geo.external_wall_area + cfg.u_windows * geo.window_area +
                        cfg.u_roof * cfg.ground_floor_area + cfg.u_ground_floor * cfg.ground_floor_area;
    const double h_ve = k.infiltration_factor * (cfg.permeability / k.permeability_divisor) * geo.volume;

    // Gains, kWh/a. Facade area is split evenly over the four orientations.
    const double facade = geo.gross_wall / 4.0;
    const double q_sol = cfg.g_windows * facade *
                         (cfg.wwr_south * k.irradiation_south + cfg.wwr_north * k.irradiation_north +
                          (cfg.wwr_east + cfg.wwr_west) * k.irradiation_east_west);
    const double floor_area = cfg.ground_floor_area * cfg.number_of_floors;
    const double q_int = (k.light_heat_gain + cfg.equipment_gain + k.occupant_heat_output / cfg.occupancy) *
                         floor_area * k.operating_hours / 1000.0;

    const double losses = (h_tr + h_ve) * k.degree_hours / 1000.0;
    return std::max(0.0, losses - k.gain_utilization * (q_sol + q_int));
}

double paired_effect(const BuildingConfig& cfg, std::string_view treatment, double control, double treated,
                     const OracleConstants& k) {
    BuildingConfig c = cfg;
    BuildingConfig t = cfg;
    c.set(treatment, control);
    t.set(treatment, treated);
    return heating_load(t, k) - heating_load(c, k);
}

namespace {

CausalGraph building_skeleton_dag() {
    std::vector<std::string> nodes;
    for (auto n : BuildingConfig::field_names()) nodes.emplace_back(n);
    for (auto n : {col::kVolume, col::kExternalWallArea, col::kWindowArea, col::kWwr, col::kHeatingLoad})
        nodes.emplace_back(n);
    CausalGraph g(std::move(nodes));

    for (auto geo : {col::kHeight, col::kNumberOfFloors, col::kGroundFloorArea}) {
        for (auto eff : {col::kVolume, col::kHeatingLoad, col::kExternalWallArea, col::kWindowArea})
            g.add_directed(geo, eff);
    }
    for (auto dir : {col::kWwrNorth, col::kWwrEast, col::kWwrSouth, col::kWwrWest}) g.add_directed(dir, col::kWwr);
    g.add_directed(col::kWwr, col::kExternalWallArea);
    g.add_directed(col::kWwr, col::kWindowArea);
    g.add_directed(col::kWwrSouth, col::kHeatingLoad);
    g.add_directed(col::kWwrNorth, col::kHeatingLoad);
    for (auto cause : {col::kVolume, col::kExternalWallArea, col::kWindowArea, col::kUWall, col::kUGroundFloor,
                       col::kURoof, col::kUWindows, col::kGWindows, col::kPermeability, col::kEquipmentGain,
                       col::kOccupancy})
        g.add_directed(cause, col::kHeatingLoad);
    return g;
}

}  // namespace

CausalGraph ground_truth_dag() { return building_skeleton_dag(); }

CausalGraph raw_building_cpdag() {
    CausalGraph g = cpdag_of_dag(ground_truth_dag());
    g.add_undirected(col::kExternalWallArea, col::kWindowArea);
    return g;
}

}  // namespace whatif
