#pragma once

#include <array>
#include <string>
#include <string_view>

#include "whatif/graph.hpp"

namespace whatif {

/// Column names shared by the dataset, the oracle and the ground-truth graph.
namespace col {
inline constexpr std::string_view kGroundFloorArea = "Ground_Floor_Area";
inline constexpr std::string_view kHeight = "Height";
inline constexpr std::string_view kNumberOfFloors = "Number_of_Floors";
inline constexpr std::string_view kUWall = "u_Value_Wall";
inline constexpr std::string_view kUInternalWall = "u_Value_Internal_Wall";
inline constexpr std::string_view kUGroundFloor = "u_Value_Ground_Floor";
inline constexpr std::string_view kURoof = "u_Value_Roof";
inline constexpr std::string_view kUInternalFloor = "u_Value_Internal_Floor";
inline constexpr std::string_view kUWindows = "u_Value_Windows";
inline constexpr std::string_view kGWindows = "g_Value_Windows";
inline constexpr std::string_view kPermeability = "Permeability";
inline constexpr std::string_view kWwrNorth = "WWR_North";
inline constexpr std::string_view kWwrEast = "WWR_East";
inline constexpr std::string_view kWwrSouth = "WWR_South";
inline constexpr std::string_view kWwrWest = "WWR_West";
inline constexpr std::string_view kEquipmentGain = "Building_Equipment_Heat_Gain";
inline constexpr std::string_view kOccupancy = "Building_Occupancy";

inline constexpr std::string_view kVolume = "Volume";
inline constexpr std::string_view kExternalWallArea = "External_Wall_Area";
inline constexpr std::string_view kWindowArea = "Window_Area";
inline constexpr std::string_view kWwr = "WWR";
inline constexpr std::string_view kHeatingLoad = "Heating_Load";
}  // namespace col

/// One point of the design space. Field order matches `default_schema()`.
/// `shape_factor` is a latent perimeter coefficient: gross wall area per
/// storey is shape_factor * sqrt(ground floor area) * storey height.
struct BuildingConfig {
    double ground_floor_area = 0;
    double height = 0;
    double number_of_floors = 0;
    double u_wall = 0;
    double u_internal_wall = 0;
    double u_ground_floor = 0;
    double u_roof = 0;
    double u_internal_floor = 0;
    double u_windows = 0;
    double g_windows = 0;
    double permeability = 0;
    double wwr_north = 0;
    double wwr_east = 0;
    double wwr_south = 0;
    double wwr_west = 0;
    double equipment_gain = 0;
    double occupancy = 0;
    double shape_factor = 4.2;

    static constexpr std::size_t kFieldCount = 17;
    static constexpr double kShapeFactorMin = 3.6;
    static constexpr double kShapeFactorMax = 4.8;

    /// Named access to the 17 schema fields; throws ValidationError for
    /// anything else (including "shape_factor", which is not a column).
    double get(std::string_view column) const;
    void set(std::string_view column, double value);
    static bool has_field(std::string_view column);
    static const std::array<std::string_view, kFieldCount>& field_names();

    friend bool operator==(const BuildingConfig&, const BuildingConfig&) = default;
};

/// Surrogate constants of the steady-state heating model. Defaults: see
/// README (Munich-like climate).
struct OracleConstants {
    double degree_hours = 84000.0;             // K h / a
    double infiltration_factor = 0.34;         // Wh / (m3 K)
    double permeability_divisor = 20.0;        // permeability at 50 Pa -> air changes
    double irradiation_south = 400.0;          // kWh / (m2 a)
    double irradiation_east_west = 250.0;      // kWh / (m2 a)
    double irradiation_north = 100.0;          // kWh / (m2 a)
    double occupant_heat_output = 70.0;        // W / person
    double gain_utilization = 0.7;             // eta, (0, 1]
    double operating_hours = 1500.0;           // h / a with internal gains in the heating season
    double light_heat_gain = 8.0;              // W / m2, held fixed

    /// Throws ValidationError when a constant is non-positive, eta > 1, or
    /// south irradiation is not the strict maximum.
    void validate() const;
};

struct Geometry {
    double volume = 0;
    double gross_wall = 0;
    double window_area = 0;
    double external_wall_area = 0;
    double wwr = 0;
};

/// Throws DomainError for non-positive area, height or floor count, or
/// window ratios outside [0, 1].
Geometry derive_geometry(const BuildingConfig& cfg);

/// Annual heating demand in kWh/a:
///   max(0, (H_tr + H_ve) * degree_hours / 1000 - eta * (Q_sol + Q_int))
/// Internal wall and internal floor u-values do not enter.
double heating_load(const BuildingConfig& cfg, const OracleConstants& k = {});

/// Unit-level causal contrast: heating_load with `treatment` set to `treated`
/// minus heating_load with it set to `control`, everything else fixed.
double paired_effect(const BuildingConfig& cfg, std::string_view treatment, double control, double treated,
                     const OracleConstants& k = {});

/// The pruned causal graph of the design space (22 variables).
CausalGraph ground_truth_dag();

/// The structure discovery is expected to return before pruning: the ground
/// truth's equivalence class plus the unoriented
/// External_Wall_Area -- Window_Area adjacency induced by the latent shape.
CausalGraph raw_building_cpdag();

}  // namespace whatif
