#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chsim/config.hpp"
#include "chsim/errors.hpp"

namespace chsim {

struct PresetInfo {
    std::string name;
    std::string description;
};

namespace detail {

inline nlohmann::json preset_family(const std::string& family) {
    using nlohmann::json;
    json doc;
    if (family == "noise2d") {
        // Spinodal decomposition from uniform noise, 2^9 nodes per direction.
        doc["grid"] = {{"sizes", {512, 512}}};
        doc["model"] = {{"dt", "4*eps^2"}};
        doc["init"] = {{"kind", "noise"}, {"amplitude", 1.0}, {"seed", 42}};
        doc["schedule"] = {{"steps", 2000}, {"diag_stride", 20}, {"snapshot_stride", 500}};
    } else if (family == "blob2d") {
        // Connected set (smooth union of three overlapping disks) relaxing
        // toward a ball; dx = 1/2^8, eps = 2 dx, dt = eps^4.
        doc["grid"] = {{"sizes", {256, 256}}};
        doc["model"] = json::object();
        doc["init"] = {{"kind", "blob"},
                       {"balls",
                        {{{"center", {0.42, 0.45}}, {"radius", 0.14}},
                         {{"center", {0.58, 0.48}}, {"radius", 0.12}},
                         {{"center", {0.50, 0.61}}, {"radius", 0.13}}}}};
        doc["schedule"] = {{"steps", 10000}, {"diag_stride", 50}, {"snapshot_stride", 2500}};
    } else if (family == "fiveballs2d") {
        // Disjoint union of five small disks of distinct radii: local mass
        // conservation keeps all five under the mobility models.
        doc["grid"] = {{"sizes", {256, 256}}};
        doc["model"] = json::object();
        doc["init"] = {{"kind", "balls"},
                       {"balls",
                        {{{"center", {0.25, 0.25}}, {"radius", 0.10}},
                         {{"center", {0.70, 0.30}}, {"radius", 0.08}},
                         {{"center", {0.30, 0.70}}, {"radius", 0.06}},
                         {{"center", {0.72, 0.72}}, {"radius", 0.05}},
                         {{"center", {0.50, 0.48}}, {"radius", 0.035}}}}};
        doc["schedule"] = {{"steps", 10000}, {"diag_stride", 50}, {"snapshot_stride", 2500}};
    } else if (family == "disk2d") {
        // Single disk: stationary under surface diffusion, so radius drift
        // measures the quality of the scheme.
        doc["grid"] = {{"sizes", {256, 256}}};
        doc["model"] = json::object();
        doc["init"] = {{"kind", "ball"}, {"center", {0.5, 0.5}}, {"radius", 0.2}};
        doc["schedule"] = {{"steps", 2000}, {"diag_stride", 20}, {"snapshot_stride", 1000}};
    } else if (family == "tube3d") {
        // Thin capped tube in 3D, desk-scale 128^3 variant. At dt = 4 eps^2
        // the classical model evaporates the structure within a dozen steps
        // while the two-mobility model keeps it connected.
        doc["grid"] = {{"sizes", {128, 128, 128}}};
        doc["model"] = {{"dt", "4*eps^2"}};
        doc["init"] = {{"kind", "tube"},
                       {"axis", 0},
                       {"center", {0.5, 0.5, 0.5}},
                       {"radius", "3*eps"},
                       {"half_length", 0.3}};
        doc["schedule"] = {{"steps", 12}, {"diag_stride", 1}, {"snapshot_stride", 4}};
    } else if (family == "plate3d") {
        // Thin plate (slab) in 3D, desk-scale 128^3 variant.
        doc["grid"] = {{"sizes", {128, 128, 128}}};
        doc["model"] = {{"dt", "4*eps^2"}};
        doc["init"] = {{"kind", "plate"},
                       {"axis", 2},
                       {"center", 0.5},
                       {"half_thickness", "2*eps"}};
        doc["schedule"] = {{"steps", 50}, {"diag_stride", 1}, {"snapshot_stride", 25}};
    } else {
        throw ConfigError("unknown preset family '" + family + "'");
    }
    return doc;
}

inline const std::vector<std::string>& preset_families() {
    static const std::vector<std::string> f{"noise2d", "blob2d",  "fiveballs2d",
                                            "disk2d",  "tube3d", "plate3d"};
    return f;
}

inline const char* family_description(const std::string& family) {
    if (family == "noise2d") return "512^2 spinodal decomposition from uniform noise, dt = 4*eps^2";
    if (family == "blob2d") return "256^2 connected blob relaxing toward a disk, dt = eps^4";
    if (family == "fiveballs2d") return "256^2 five disjoint disks, local mass conservation study";
    if (family == "disk2d") return "256^2 single disk, radius drift study";
    if (family == "tube3d") return "128^3 thin tube, survival under the three models";
    if (family == "plate3d") return "128^3 thin plate, dewetting study";
    return "";
}

} // namespace detail

/// Frozen run configurations named <family>-<model>, e.g. "fiveballs2d-nmn".
inline nlohmann::json preset_config(const std::string& name) {
    const std::size_t dash = name.rfind('-');
    if (dash == std::string::npos)
        throw ConfigError("unknown preset '" + name + "' (expected <family>-<model>)");
    const std::string family = name.substr(0, dash);
    const std::string model = name.substr(dash + 1);
    if (model != "cch" && model != "mch" && model != "nmn")
        throw ConfigError("unknown preset model suffix '-" + model + "'");
    nlohmann::json doc = detail::preset_family(family);
    doc["model"]["name"] = model;
    doc["output"] = {{"dir", "out-" + name}};
    return doc;
}

/// Catalog of preset names with one-line descriptions.
inline std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const std::string& family : detail::preset_families()) {
        for (const char* model : {"cch", "mch", "nmn"}) {
            out.push_back(PresetInfo{family + "-" + model,
                                     std::string(detail::family_description(family)) +
                                         " [" + model + "]"});
        }
    }
    return out;
}

} // namespace chsim
