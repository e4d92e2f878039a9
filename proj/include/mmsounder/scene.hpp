// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - time-varying propagation scenes and ground-truth multipath

#pragma once

#include "mmsounder/constants.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>

namespace mmsounder {

using vec3d = std::array<double, 3>; // x, y east/north-style plan view, z up

struct Pose {
    vec3d position{0.0, 0.0, 0.0};
    double boresight_azimuth_deg = 0.0; // array normal in the horizontal plane
};

enum class ScattererKind { point_reflector, blocker_screen };

struct Waypoint {
    double t_s = 0.0;
    vec3d position{0.0, 0.0, 0.0};
};

/*!
 * A moving object. Point reflectors spawn one single-bounce path each.
 * Blocker screens are vertical rectangles: width centered on the trajectory
 * point along the direction of travel, extending from the ground up to
 * `extent_m[1]`; they attenuate paths they intersect by blockage_loss_db.
 */
struct Scatterer {
    std::string name;
    ScattererKind kind = ScattererKind::point_reflector;
    std::vector<Waypoint> trajectory; // waypoint times strictly increasing
    double reflection_loss_db = 0.0;  // point reflectors only
    std::array<double, 2> extent_m{0.0, 0.0}; // blockers: width, height
    double blockage_loss_db = 6.0;    // blockers: full (e.g. 20) or partial (6)

    vec3d position_at(double t_s) const;
    vec3d velocity_at(double t_s) const;
    void validate() const;
};

enum class Interaction { los, single_bounce, blocked };

struct GroundTruthMPC {
    double delay_s = 0.0;
    double dod_azimuth_deg = 0.0;
    double doa_azimuth_deg = 0.0;
    double dod_elevation_deg = 0.0;
    double doa_elevation_deg = 0.0;
    cdouble complex_gain{0.0, 0.0}; // linear field: path loss, losses, phase
    double doppler_hz = 0.0;
    Interaction interaction = Interaction::los;
};

struct Scene {
    std::string name;
    double duration_s = 0.0;
    double carrier_hz = 27.85e9;
    Pose tx;
    Pose rx;
    std::vector<Scatterer> scatterers;

    void validate() const;
    uint64_t content_hash() const;
};

// 20*log10(4*pi*d*f/c); throws for non-positive distance.
double free_space_path_loss_db(double distance_m, double carrier_hz);

// Ground-truth MPC list at time t: LOS plus one single-bounce path per point
// reflector; blocked paths keep their geometry but are attenuated and marked.
std::vector<GroundTruthMPC> snapshot_mpcs(const Scene &scene, double t_s);

/*!
 * Canned scenes:
 *  - "case1_moving_scatterers": three approaching cars and a receding
 *    pedestrian in front of co-located TX/RX; LOS outside the steered sector.
 *  - "case2_blockage_truck" / "_van" / "_car": street-crossing blocker of
 *    varying height over a LOS + single-reflector channel; the truck blocks
 *    the reflection during [3, 4.8] s and the LOS during [5.5, 9] s.
 */
std::map<std::string, Scene> scenario_templates();

// JSON scene files with a schema_version field.
void write_scene(const Scene &scene, const std::string &path);
Scene read_scene(const std::string &path);

} // namespace mmsounder
