#ifndef WGRES_CONFIG_HPP
#define WGRES_CONFIG_HPP

#include "wgres/measure.hpp"
#include "wgres/transverse.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wgres {

/// Run configuration, one human-editable JSON file.  Unknown keys are errors.
struct RunConfig {
    struct Strip {
        double d = 2.0;
        std::vector<ProfileSegment> segments; // empty => constant depth
        double depth = 5.0;
    } strip;

    struct Trap {
        std::string kind = "disk"; // disk | rectangle | segment | circle | polyline
        double beta = 4.5;
        double radius = 1.0;                          // disk, circle
        double width = 1.0, height = 1.0;             // rectangle
        double length = 2.0;                          // segment
        std::vector<std::array<double, 2>> points;    // polyline (relative to anchor)
    } trap;

    struct Placement {
        double rho = 1.5;
        double x1 = 0.0;
        std::string side = "below"; // below | above
    } placement;

    struct Numerics {
        int order = 16;
        double trap_tol = 1e-11;
        double pole_tol = 1e-12;
        double rc_tol = 1e-11;
        double neighborhood = 0.0; // 0 = auto (quarter of the spectral gap)
        double regime_threshold = 0.5;
        std::array<double, 2> trap_window{0.0, 0.0}; // 0,0 = auto
    } numerics;

    struct Sweep {
        double rho_min = 1.2;
        double rho_max = 2.4;
        int points = 7;
        std::string spacing = "geometric"; // geometric | linear
    } sweep;

    struct Output {
        std::string directory = "out";
        std::vector<std::string> formats{"csv", "json"};
    } output;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// FNV-1a hash of the physics- and numerics-relevant fields (the swept rho
/// and the output section are excluded), used to key sweep result files.
std::uint64_t config_hash(const RunConfig& config);

TransverseProfile make_profile(const RunConfig& config);

/// Builds the trap measure at the given strip distance.
KatoMeasure make_trap(const RunConfig& config, double rho);

std::vector<double> sweep_grid(const RunConfig& config);

} // namespace wgres

#endif
