// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - time-varying propagation scenes and ground-truth multipath

#include "mmsounder/scene.hpp"
#include "mmsounder/beamforming.hpp"
#include "mmsounder/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mmsounder {

namespace {

vec3d sub(const vec3d &a, const vec3d &b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const vec3d &a, const vec3d &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const vec3d &a) { return std::sqrt(dot(a, a)); }

double azimuth_of(const vec3d &d, double boresight_deg)
{
    return wrap_deg(rad2deg(std::atan2(d[1], d[0])) - boresight_deg);
}

double elevation_of(const vec3d &d)
{
    return rad2deg(std::atan2(d[2], std::hypot(d[0], d[1])));
}

// True if segment a->b passes through the vertical screen rectangle of the
// given blocker at time t.
bool screen_blocks(const Scatterer &s, double t, const vec3d &a, const vec3d &b)
{
    const vec3d c = s.position_at(t);
    vec3d along = s.velocity_at(t);
    along[2] = 0.0;
    const double va = std::hypot(along[0], along[1]);
    if (va < 1e-12)
        along = {1.0, 0.0, 0.0}; // stationary screen: width along x by convention
    else {
        along[0] /= va;
        along[1] /= va;
    }
    const vec3d normal = {-along[1], along[0], 0.0};

    const vec3d ab = sub(b, a);
    const double denom = dot(ab, normal);
    const double dist_a = dot(sub(a, c), normal);
    if (std::abs(denom) < 1e-12)
        return false; // path parallel to the screen plane: treat as grazing
    const double sparam = -dist_a / denom;
    if (sparam <= 0.0 || sparam >= 1.0)
        return false;
    const vec3d p = {a[0] + sparam * ab[0], a[1] + sparam * ab[1], a[2] + sparam * ab[2]};
    const vec3d rel = sub(p, c);
    const double lateral = rel[0] * along[0] + rel[1] * along[1];
    if (std::abs(lateral) > s.extent_m[0] / 2.0)
        return false;
    return p[2] >= 0.0 && p[2] <= s.extent_m[1];
}

// Total blockage attenuation (dB) over all screens for segment a->b.
double blockage_db(const Scene &scene, double t, const vec3d &a, const vec3d &b)
{
    double loss = 0.0;
    for (const Scatterer &s : scene.scatterers)
        if (s.kind == ScattererKind::blocker_screen && screen_blocks(s, t, a, b))
            loss += s.blockage_loss_db;
    return loss;
}

GroundTruthMPC make_mpc(const Scene &scene, double t, const vec3d &point,
                        double extra_loss_db, Interaction base)
{
    GroundTruthMPC m;
    // DoD: from TX toward the interaction point; DoA: from RX toward it
    // (toward the TX itself for the LOS path).
    const vec3d d_tx = sub(point, scene.tx.position);
    const vec3d d_rx = base == Interaction::los ? sub(scene.tx.position, scene.rx.position)
                                                : sub(point, scene.rx.position);
    m.dod_azimuth_deg = azimuth_of(d_tx, scene.tx.boresight_azimuth_deg);
    m.doa_azimuth_deg = azimuth_of(d_rx, scene.rx.boresight_azimuth_deg);
    m.dod_elevation_deg = elevation_of(d_tx);
    m.doa_elevation_deg = elevation_of(d_rx);

    double path_m;
    double block_db;
    if (base == Interaction::los) {
        path_m = norm(d_tx); // point == rx position
        block_db = blockage_db(scene, t, scene.tx.position, scene.rx.position);
    } else {
        path_m = norm(d_tx) + norm(d_rx);
        block_db = blockage_db(scene, t, scene.tx.position, point) +
                   blockage_db(scene, t, point, scene.rx.position);
    }
    m.delay_s = path_m / speed_of_light;
    m.interaction = block_db > 0.0 ? Interaction::blocked : base;

    const double fspl = free_space_path_loss_db(path_m, scene.carrier_hz);
    const double amp = db2mag(-(fspl + extra_loss_db + block_db));
    m.complex_gain = std::polar(amp, -2.0 * pi * std::fmod(scene.carrier_hz * m.delay_s, 1.0));
    return m;
}

} // namespace

void Scatterer::validate() const
{
    if (trajectory.empty())
        throw std::invalid_argument("Scatterer '" + name + "': trajectory must have waypoints");
    for (size_t i = 1; i < trajectory.size(); ++i)
        if (!(trajectory[i].t_s > trajectory[i - 1].t_s))
            throw std::invalid_argument("Scatterer '" + name + "': waypoint times must be strictly increasing");
    if (reflection_loss_db < 0.0)
        throw std::invalid_argument("Scatterer '" + name + "': reflection_loss_db must be >= 0");
    if (kind == ScattererKind::blocker_screen && (extent_m[0] <= 0.0 || extent_m[1] <= 0.0))
        throw std::invalid_argument("Scatterer '" + name + "': blocker extents must be > 0");
}

vec3d Scatterer::position_at(double t_s) const
{
    if (trajectory.size() == 1 || t_s <= trajectory.front().t_s)
        return trajectory.front().position;
    if (t_s >= trajectory.back().t_s)
        return trajectory.back().position;
    size_t i = 1;
    while (trajectory[i].t_s < t_s)
        ++i;
    const Waypoint &a = trajectory[i - 1];
    const Waypoint &b = trajectory[i];
    const double f = (t_s - a.t_s) / (b.t_s - a.t_s);
    return {a.position[0] + f * (b.position[0] - a.position[0]),
            a.position[1] + f * (b.position[1] - a.position[1]),
            a.position[2] + f * (b.position[2] - a.position[2])};
}

vec3d Scatterer::velocity_at(double t_s) const
{
    if (trajectory.size() < 2)
        return {0.0, 0.0, 0.0};
    // clamp to the first/last segment outside the waypoint span
    size_t i = 1;
    while (i + 1 < trajectory.size() && trajectory[i].t_s <= t_s)
        ++i;
    if (t_s < trajectory.front().t_s)
        i = 1;
    if (t_s >= trajectory.back().t_s || t_s < trajectory.front().t_s)
        return {0.0, 0.0, 0.0}; // parked before first / after last waypoint
    const Waypoint &a = trajectory[i - 1];
    const Waypoint &b = trajectory[i];
    const double dt = b.t_s - a.t_s;
    return {(b.position[0] - a.position[0]) / dt,
            (b.position[1] - a.position[1]) / dt,
            (b.position[2] - a.position[2]) / dt};
}

void Scene::validate() const
{
    if (duration_s <= 0.0)
        throw std::invalid_argument("Scene: duration_s must be > 0");
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("Scene: carrier_hz must be > 0");
    for (const Scatterer &s : scatterers)
        s.validate();
}

double free_space_path_loss_db(double distance_m, double carrier_hz)
{
    if (distance_m <= 0.0)
        throw std::invalid_argument("free_space_path_loss_db: distance must be > 0");
    if (carrier_hz <= 0.0)
        throw std::invalid_argument("free_space_path_loss_db: carrier must be > 0");
    return 20.0 * std::log10(4.0 * pi * distance_m * carrier_hz / speed_of_light);
}

std::vector<GroundTruthMPC> snapshot_mpcs(const Scene &scene, double t_s)
{
    scene.validate();
    if (t_s < 0.0 || t_s > scene.duration_s)
        throw std::invalid_argument("snapshot_mpcs: t outside scene duration");

    std::vector<GroundTruthMPC> out;

    GroundTruthMPC los = make_mpc(scene, t_s, scene.rx.position, 0.0, Interaction::los);
    los.doppler_hz = 0.0; // poses are static; only scatterers move
    out.push_back(los);

    for (const Scatterer &s : scene.scatterers) {
        if (s.kind != ScattererKind::point_reflector)
            continue;
        const vec3d p = s.position_at(t_s);
        GroundTruthMPC m = make_mpc(scene, t_s, p, s.reflection_loss_db, Interaction::single_bounce);
        // path-length rate: projection of the velocity on both leg directions
        const vec3d v = s.velocity_at(t_s);
        const vec3d d_tx = sub(p, scene.tx.position);
        const vec3d d_rx = sub(p, scene.rx.position);
        const double lt = norm(d_tx), lr = norm(d_rx);
        double rate = 0.0;
        if (lt > 1e-12 && lr > 1e-12)
            rate = dot(v, d_tx) / lt + dot(v, d_rx) / lr;
        m.doppler_hz = -scene.carrier_hz / speed_of_light * rate;
        out.push_back(m);
    }
    return out;
}

std::map<std::string, Scene> scenario_templates()
{
    std::map<std::string, Scene> scenes;

    // Street scene: co-located TX (mast) and RX looking down the road, three
    // cars approaching from the front, one pedestrian walking away. The LOS
    // points backwards out of the steered sector.
    {
        Scene s;
        s.name = "case1_moving_scatterers";
        s.duration_s = 12.0;
        s.tx = {{0.0, 0.0, 3.5}, 0.0};
        s.rx = {{-3.0, 0.0, 1.8}, 0.0};

        auto car = [](const std::string &name, vec3d start, double vx, double loss) {
            Scatterer c;
            c.name = name;
            c.kind = ScattererKind::point_reflector;
            c.reflection_loss_db = loss;
            c.trajectory = {{0.0, start},
                            {12.0, {start[0] + 12.0 * vx, start[1], start[2]}}};
            return c;
        };
        s.scatterers.push_back(car("car_a", {85.0, 4.0, 0.8}, -5.0, 8.0));
        s.scatterers.push_back(car("car_b", {70.0, -8.0, 0.8}, -4.5, 8.0));
        s.scatterers.push_back(car("car_c", {48.0, 7.0, 0.8}, -3.5, 8.0));
        Scatterer ped;
        ped.name = "pedestrian";
        ped.kind = ScattererKind::point_reflector;
        ped.reflection_loss_db = 12.0;
        ped.trajectory = {{0.0, {12.0, 1.5, 0.9}}, {12.0, {28.2, 1.5, 0.9}}};
        s.scatterers.push_back(ped);
        scenes.emplace(s.name, s);
    }

    // Street-crossing blocker over a two-path channel. Angles are chosen so
    // the LOS sits at (DoD, DoA) = (-5, -25) deg and the wall reflection at
    // (+35, -35) deg in the respective array frames; the blocker first
    // shadows the reflection during [3, 4.8] s, then the LOS during
    // [5.5, 9] s (it decelerates between the two crossing points).
    //
    // The wall path is placed 10 dB below the LOS as seen through the
    // 19-beam deployment codebook, i.e. including the extra scan loss of its
    // further-off-boresight angles, so the gap survives into the beam data.
    ArrayGeometry case2_geometry;
    std::vector<double> case2_azimuths;
    for (int a = -45; a <= 45; a += 5)
        case2_azimuths.push_back(static_cast<double>(a));
    const BeamCodebook case2_codebook =
        build_codebook(case2_geometry, case2_azimuths, {0.0}, 11.25);
    const auto best_pair_gain_db = [&case2_codebook](const GroundTruthMPC &m) {
        const auto map = beam_pair_power_map(case2_codebook, case2_codebook,
                                             m.dod_azimuth_deg, m.dod_elevation_deg,
                                             m.doa_azimuth_deg, m.doa_elevation_deg,
                                             0.0);
        double best = -1e9;
        for (const auto &row : map)
            for (double v : row)
                best = std::max(best, v);
        return best;
    };
    for (const auto &[variant, height, loss] :
         {std::tuple<const char *, double, double>{"truck", 4.0, 20.0},
          {"van", 2.6, 6.0},
          {"car", 1.5, 6.0}}) {
        Scene s;
        s.name = std::string("case2_blockage_") + variant;
        s.duration_s = 12.0;
        s.tx = {{0.0, 6.0, 3.5}, -19.62};
        s.rx = {{24.0, -5.0, 1.8}, 180.38};

        Scatterer wall;
        wall.name = "wall_reflector";
        wall.kind = ScattererKind::point_reflector;
        wall.trajectory = {{0.0, {5.766, 7.586, 2.8}}, {12.0, {5.766, 7.586, 2.8}}};
        // set the reflected path 10 dB below the LOS at the receiver
        const double d_los = norm(sub(s.rx.position, s.tx.position));
        const double d_ref = norm(sub(wall.trajectory[0].position, s.tx.position)) +
                             norm(sub(s.rx.position, wall.trajectory[0].position));
        wall.reflection_loss_db =
            10.0 - (free_space_path_loss_db(d_ref, s.carrier_hz) -
                    free_space_path_loss_db(d_los, s.carrier_hz));
        s.scatterers.push_back(wall);

        // absorb the beam-level scan-loss difference into the configured gap
        {
            double g_los = 0.0, g_ref = 0.0;
            for (const auto &m : snapshot_mpcs(s, 0.0))
                (m.interaction == Interaction::los ? g_los : g_ref) =
                    best_pair_gain_db(m);
            s.scatterers.back().reflection_loss_db -= g_los - g_ref;
        }

        // street-level crossing abscissae of the two paths (y = 0 plane)
        const vec3d &txp = s.tx.position;
        const vec3d &rxp = s.rx.position;
        const vec3d &wp = wall.trajectory[0].position;
        const double x_los = txp[0] + (rxp[0] - txp[0]) * txp[1] / (txp[1] - rxp[1]);
        const double x_ref = wp[0] + (rxp[0] - wp[0]) * wp[1] / (wp[1] - rxp[1]);

        Scatterer blocker;
        blocker.name = variant;
        blocker.kind = ScattererKind::blocker_screen;
        blocker.extent_m = {3.0, height};
        blocker.blockage_loss_db = loss;
        const double hw = blocker.extent_m[0] / 2.0;
        blocker.trajectory = {
            {0.0, {x_ref + hw + 3.0 * (3.0 / 1.8), 0.0, 0.0}},
            {3.0, {x_ref + hw, 0.0, 0.0}},
            {4.8, {x_ref - hw, 0.0, 0.0}},
            {5.5, {x_los + hw, 0.0, 0.0}},
            {9.0, {x_los - hw, 0.0, 0.0}},
            {12.0, {x_los - hw - 3.0 * (3.0 / 3.5), 0.0, 0.0}},
        };
        s.scatterers.push_back(blocker);
        scenes.emplace(s.name, s);
    }

    return scenes;
}

uint64_t Scene::content_hash() const
{
    // hash the canonical JSON serialization
    nlohmann::json j;
    j["name"] = name;
    j["duration_s"] = duration_s;
    j["carrier_hz"] = carrier_hz;
    j["tx"] = {{"position", tx.position}, {"boresight_azimuth_deg", tx.boresight_azimuth_deg}};
    j["rx"] = {{"position", rx.position}, {"boresight_azimuth_deg", rx.boresight_azimuth_deg}};
    nlohmann::json js = nlohmann::json::array();
    for (const Scatterer &s : scatterers) {
        nlohmann::json jw = nlohmann::json::array();
        for (const Waypoint &w : s.trajectory)
            jw.push_back({{"t_s", w.t_s}, {"position", w.position}});
        js.push_back({{"name", s.name},
                      {"kind", s.kind == ScattererKind::point_reflector ? "point_reflector" : "blocker_screen"},
                      {"reflection_loss_db", s.reflection_loss_db},
                      {"extent_m", s.extent_m},
                      {"blockage_loss_db", s.blockage_loss_db},
                      {"trajectory", jw}});
    }
    j["scatterers"] = js;
    const std::string dump = j.dump();
    return fnv1a64(dump.data(), dump.size());
}

void write_scene(const Scene &scene, const std::string &path)
{
    scene.validate();
    nlohmann::json j;
    j["schema_version"] = 1;
    j["name"] = scene.name;
    j["duration_s"] = scene.duration_s;
    j["carrier_hz"] = scene.carrier_hz;
    j["tx"] = {{"position", scene.tx.position},
               {"boresight_azimuth_deg", scene.tx.boresight_azimuth_deg}};
    j["rx"] = {{"position", scene.rx.position},
               {"boresight_azimuth_deg", scene.rx.boresight_azimuth_deg}};
    nlohmann::json js = nlohmann::json::array();
    for (const Scatterer &s : scene.scatterers) {
        nlohmann::json jw = nlohmann::json::array();
        for (const Waypoint &w : s.trajectory)
            jw.push_back({{"t_s", w.t_s}, {"position", w.position}});
        js.push_back({{"name", s.name},
                      {"kind", s.kind == ScattererKind::point_reflector ? "point_reflector" : "blocker_screen"},
                      {"reflection_loss_db", s.reflection_loss_db},
                      {"extent_m", s.extent_m},
                      {"blockage_loss_db", s.blockage_loss_db},
                      {"trajectory", jw}});
    }
    j["scatterers"] = js;

    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_scene: cannot open " + path);
    f << j.dump(2) << "\n";
    if (!f)
        throw std::runtime_error("write_scene: write failed for " + path);
}

Scene read_scene(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("read_scene: cannot open " + path);
    nlohmann::json j;
    f >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw std::runtime_error("read_scene: unsupported schema version in " + path);

    Scene s;
    s.name = j.at("name").get<std::string>();
    s.duration_s = j.at("duration_s").get<double>();
    s.carrier_hz = j.at("carrier_hz").get<double>();
    s.tx.position = j.at("tx").at("position").get<vec3d>();
    s.tx.boresight_azimuth_deg = j.at("tx").at("boresight_azimuth_deg").get<double>();
    s.rx.position = j.at("rx").at("position").get<vec3d>();
    s.rx.boresight_azimuth_deg = j.at("rx").at("boresight_azimuth_deg").get<double>();
    for (const auto &jsc : j.at("scatterers")) {
        Scatterer sc;
        sc.name = jsc.at("name").get<std::string>();
        const std::string kind = jsc.at("kind").get<std::string>();
        if (kind == "point_reflector")
            sc.kind = ScattererKind::point_reflector;
        else if (kind == "blocker_screen")
            sc.kind = ScattererKind::blocker_screen;
        else
            throw std::runtime_error("read_scene: unknown scatterer kind '" + kind + "'");
        sc.reflection_loss_db = jsc.at("reflection_loss_db").get<double>();
        sc.extent_m = jsc.at("extent_m").get<std::array<double, 2>>();
        sc.blockage_loss_db = jsc.at("blockage_loss_db").get<double>();
        for (const auto &jw : jsc.at("trajectory"))
            sc.trajectory.push_back({jw.at("t_s").get<double>(),
                                     jw.at("position").get<vec3d>()});
        s.scatterers.push_back(std::move(sc));
    }
    s.validate();
    return s;
}

} // namespace mmsounder
