#include "ptycho/config.hpp"

#include <set>
#include <stdexcept>

namespace ptycho {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("unknown config key '" + key + "' in " +
                                  where);
    }
  }
}

GroupConfig parse_group(const json& j, const std::string& where,
                        GroupConfig defaults) {
  reject_unknown(j, {"enabled", "lr"}, where);
  GroupConfig g = defaults;
  g.enabled = j.value("enabled", g.enabled);
  g.lr = j.value("lr", g.lr);
  return g;
}

json group_to_json(const GroupConfig& g) {
  return {{"enabled", g.enabled}, {"lr", g.lr}};
}

}  // namespace

SimulationRecipe parse_recipe(const json& j) {
  reject_unknown(j,
                 {"pattern_px", "grid_n", "step_px", "jitter_std_px",
                  "wavelength_m", "z_true_m", "pixel_pitch_m", "seed",
                  "probe_modes", "probe_radius_px", "object_mag_low",
                  "object_phase_span", "object_margin_px", "noise",
                  "poisson_flux", "z_error_frac", "position_error_std_px"},
                 "recipe");
  SimulationRecipe r;
  r.pattern_px = j.value("pattern_px", r.pattern_px);
  r.grid_n = j.value("grid_n", r.grid_n);
  r.step_px = j.value("step_px", r.step_px);
  r.jitter_std_px = j.value("jitter_std_px", r.jitter_std_px);
  r.wavelength = j.value("wavelength_m", r.wavelength);
  r.z_true = j.value("z_true_m", r.z_true);
  r.pixel_pitch = j.value("pixel_pitch_m", r.pixel_pitch);
  r.seed = j.value("seed", r.seed);
  r.probe_modes = j.value("probe_modes", r.probe_modes);
  r.probe_radius_px = j.value("probe_radius_px", r.probe_radius_px);
  r.object_mag_low = j.value("object_mag_low", r.object_mag_low);
  r.object_phase_span = j.value("object_phase_span", r.object_phase_span);
  r.object_margin_px = j.value("object_margin_px", r.object_margin_px);
  const std::string noise = j.value("noise", std::string("none"));
  if (noise == "none") {
    r.noise = SimulationRecipe::Noise::kNone;
  } else if (noise == "poisson") {
    r.noise = SimulationRecipe::Noise::kPoisson;
  } else {
    throw std::invalid_argument("recipe: noise must be 'none' or 'poisson'");
  }
  r.poisson_flux = j.value("poisson_flux", r.poisson_flux);
  r.z_error_frac = j.value("z_error_frac", r.z_error_frac);
  r.position_error_std_px = j.value("position_error_std_px", r.position_error_std_px);
  return r;
}

json recipe_to_json(const SimulationRecipe& r) {
  return {{"pattern_px", r.pattern_px},
          {"grid_n", r.grid_n},
          {"step_px", r.step_px},
          {"jitter_std_px", r.jitter_std_px},
          {"wavelength_m", r.wavelength},
          {"z_true_m", r.z_true},
          {"pixel_pitch_m", r.pixel_pitch},
          {"seed", r.seed},
          {"probe_modes", r.probe_modes},
          {"probe_radius_px", r.probe_radius_px},
          {"object_mag_low", r.object_mag_low},
          {"object_phase_span", r.object_phase_span},
          {"object_margin_px", r.object_margin_px},
          {"noise", r.noise == SimulationRecipe::Noise::kPoisson ? "poisson"
                                                                 : "none"},
          {"poisson_flux", r.poisson_flux},
          {"z_error_frac", r.z_error_frac},
          {"position_error_std_px", r.position_error_std_px}};
}

ReconstructToolConfig parse_reconstruct_config(const json& j) {
  reject_unknown(j,
                 {"epochs", "batch_size", "loss_domain", "method", "object",
                  "probe", "distance", "positions", "reg_object_range",
                  "reg_probe_energy", "reg_position_l1", "seed", "probe_modes",
                  "probe_init_radius_px", "object_margin_px",
                  "checkpoint_interval"},
                 "reconstruct config");
  ReconstructToolConfig c;
  ReconstructOptions& o = c.options;
  o.epochs = j.value("epochs", o.epochs);
  o.batch_size = j.value("batch_size", o.batch_size);
  const std::string domain = j.value("loss_domain", std::string("amplitude"));
  if (domain == "amplitude") {
    o.loss_domain = LossDomain::kAmplitude;
  } else if (domain == "intensity") {
    o.loss_domain = LossDomain::kIntensity;
  } else {
    throw std::invalid_argument(
        "config: loss_domain must be 'amplitude' or 'intensity'");
  }
  const std::string method = j.value("method", std::string("adam"));
  if (method == "adam") {
    o.method = OptimMethod::kAdam;
  } else if (method == "gd") {
    o.method = OptimMethod::kGradientDescent;
  } else {
    throw std::invalid_argument("config: method must be 'adam' or 'gd'");
  }
  if (j.contains("object")) o.object = parse_group(j["object"], "object", o.object);
  if (j.contains("probe")) o.probe = parse_group(j["probe"], "probe", o.probe);
  if (j.contains("distance")) {
    o.distance = parse_group(j["distance"], "distance", o.distance);
  }
  if (j.contains("positions")) {
    o.positions = parse_group(j["positions"], "positions", o.positions);
  }
  o.reg.object_range = j.value("reg_object_range", o.reg.object_range);
  o.reg.probe_energy = j.value("reg_probe_energy", o.reg.probe_energy);
  o.reg.position_l1 = j.value("reg_position_l1", o.reg.position_l1);
  o.seed = j.value("seed", o.seed);
  o.probe_modes = j.value("probe_modes", o.probe_modes);
  o.probe_init_radius_px = j.value("probe_init_radius_px", o.probe_init_radius_px);
  o.object_margin_px = j.value("object_margin_px", o.object_margin_px);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  if (o.epochs < 0 || o.batch_size < 1 || c.checkpoint_interval < 1) {
    throw std::invalid_argument("config: invalid epochs/batch/checkpoint value");
  }
  return c;
}

json reconstruct_config_to_json(const ReconstructToolConfig& c) {
  const ReconstructOptions& o = c.options;
  return {{"epochs", o.epochs},
          {"batch_size", o.batch_size},
          {"loss_domain",
           o.loss_domain == LossDomain::kAmplitude ? "amplitude" : "intensity"},
          {"method", o.method == OptimMethod::kAdam ? "adam" : "gd"},
          {"object", group_to_json(o.object)},
          {"probe", group_to_json(o.probe)},
          {"distance", group_to_json(o.distance)},
          {"positions", group_to_json(o.positions)},
          {"reg_object_range", o.reg.object_range},
          {"reg_probe_energy", o.reg.probe_energy},
          {"reg_position_l1", o.reg.position_l1},
          {"seed", o.seed},
          {"probe_modes", o.probe_modes},
          {"probe_init_radius_px", o.probe_init_radius_px},
          {"object_margin_px", o.object_margin_px},
          {"checkpoint_interval", c.checkpoint_interval}};
}

}  // namespace ptycho
