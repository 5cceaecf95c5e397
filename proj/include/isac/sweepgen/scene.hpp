#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/seed.hpp"
#include "isac/sweepgen/array.hpp"
#include "isac/sweepgen/frames.hpp"

namespace isac::sweepgen {

inline constexpr std::size_t kGestures = 8;

struct SweepTiming {
  double dwell_per_pair = 2.319e-6;  // seconds
  std::size_t pairs_per_sweep = kTxBeams * kRxBeams;
  double sweeps_per_second = 154.0;
  int symbols_per_dwell = 2;

  // pairs * dwell must equal the sweep period to within 0.1%.
  void validate(const ArrayConfig& array) const {
    if (pairs_per_sweep != array.n_tx_beams * array.n_rx_beams) {
      throw ConfigError("pairs_per_sweep " + std::to_string(pairs_per_sweep) + " != n_tx_beams * n_rx_beams");
    }
    const double period = 1.0 / sweeps_per_second;
    const double sweep = dwell_per_pair * static_cast<double>(pairs_per_sweep);
    if (std::abs(sweep - period) / period >= 1e-3) {
      throw ConfigError("beam dwell * pairs (" + std::to_string(sweep) + " s) disagrees with sweep period (" +
                        std::to_string(period) + " s) by more than 0.1%");
    }
  }
};

// Point scatterer in the array plane: x lateral, y depth along broadside (m).
struct Scatterer {
  double x = 0.0;
  double y = 1.5;
  double reflectivity = 1.0;
};

enum class GestureKind { static_pose, dynamic };

struct GestureScene {
  int gesture_id = 0;
  GestureKind kind = GestureKind::static_pose;
  std::vector<Scatterer> scatterers;
};

// Per-subject body geometry (stands in for inter-person variation).
struct SubjectGeometry {
  double distance = 1.5;       // torso depth
  double lateral_offset = 0.0;
  double scale = 1.0;          // limb reach multiplier
  double lateral_squeeze = 1.0;  // < 1 pulls every scatterer toward boresight
};

inline GestureKind gesture_kind(int gesture_id) {
  if (gesture_id < 0 || gesture_id >= static_cast<int>(kGestures)) {
    throw InputError("gesture id " + std::to_string(gesture_id) + " outside 0..7");
  }
  return gesture_id < 4 ? GestureKind::static_pose : GestureKind::dynamic;
}

// Motion period of a dynamic gesture in seconds (0 for static poses).
inline double gesture_period(int gesture_id) {
  static constexpr std::array<double, kGestures> periods{0, 0, 0, 0, 1.0, 2.0, 1.5, 2.0};
  gesture_kind(gesture_id);
  return periods[static_cast<std::size_t>(gesture_id)];
}

// Scene layout of a gesture at cycle phase in [0,1). Gestures 0-3 are static
// poses (idle, lean left, arms spread, point forward-right); 4-7 are periodic
// (wave right, flap both arms, push-pull, torso sway). Scatterers: torso,
// left hand, right hand.
inline GestureScene gesture_trajectory(int gesture_id, double phase, const SubjectGeometry& body = {}) {
  GestureScene scene;
  scene.gesture_id = gesture_id;
  scene.kind = gesture_kind(gesture_id);
  const double two_pi = 2.0 * std::numbers::pi;
  const double p = phase - std::floor(phase);
  const double s = body.scale;
  const double ox = body.lateral_offset;
  const double y0 = body.distance;
  constexpr double torso = 1.0, hand = 0.3;

  double tx = ox, ty = y0, lx = 0, ly = 0, rx = 0, ry = 0;
  switch (gesture_id) {
    case 0:  // idle, arms at sides
      lx = ox - 0.3 * s, ly = y0, rx = ox + 0.3 * s, ry = y0;
      break;
    case 1:  // lean left
      tx = ox - 0.3 * s, lx = ox - 0.6 * s, ly = y0, rx = ox, ry = y0;
      break;
    case 2:  // arms spread
      lx = ox - 0.75 * s, ly = y0, rx = ox + 0.75 * s, ry = y0;
      break;
    case 3:  // point forward-right
      lx = ox - 0.3 * s, ly = y0, rx = ox + 0.35 * s, ry = y0 - 0.55 * s;
      break;
    case 4:  // wave right hand laterally
      lx = ox - 0.3 * s, ly = y0;
      rx = ox + (0.4 + 0.25 * std::sin(two_pi * p)) * s, ry = y0 - 0.15 * s;
      break;
    case 5: {  // flap both arms out and back
      const double spread = (0.3 + 0.45 * (1.0 - std::cos(two_pi * p)) / 2.0) * s;
      lx = ox - spread, ly = y0, rx = ox + spread, ry = y0;
      break;
    }
    case 6: {  // push both hands forward and pull back
      const double reach = (0.15 + 0.4 * (1.0 - std::cos(two_pi * p)) / 2.0) * s;
      lx = ox - 0.12 * s, ly = y0 - reach, rx = ox + 0.12 * s, ry = y0 - reach;
      break;
    }
    case 7: {  // sway torso side to side
      const double dx = 0.25 * std::sin(two_pi * p) * s;
      tx = ox + dx, lx = ox + dx - 0.3 * s, ly = y0, rx = ox + dx + 0.3 * s, ry = y0;
      break;
    }
    default:
      break;
  }
  const double q = body.lateral_squeeze;
  scene.scatterers = {{tx * q, ty, torso}, {lx * q, ly, hand}, {rx * q, ry, hand}};
  return scene;
}

struct RenderOptions {
  double noise_std_db = 1.0;
  double floor = 1e-5;  // additive linear power floor before the log
};

// Power per beam pair, in dB:
//   10 log10( sum_s refl_s g_tx(theta_tx,s) g_rx(theta_rx,s) / (r_tx,s^2 r_rx,s^2) + floor )
// plus N(0, noise_std_db) per cell.
template <class Rng>
SweepFrame render_frame(const GestureScene& scene, const ArrayConfig& array, const RenderOptions& opt, Rng& rng) {
  if (scene.scatterers.empty()) throw InputError("scene needs at least one scatterer");
  const std::size_t ntx = array.n_tx_beams, nrx = array.n_rx_beams;
  std::vector<double> lin(ntx * nrx, 0.0);
  std::vector<double> gtx(ntx), grx(nrx);
  for (const auto& sc : scene.scatterers) {
    const double dtx = std::hypot(sc.x - array.tx_position_x, sc.y);
    const double drx = std::hypot(sc.x - array.rx_position_x, sc.y);
    if (dtx <= 0.0 || drx <= 0.0) throw InputError("scatterer at zero range");
    const double atx = rad2deg(std::atan2(sc.x - array.tx_position_x, sc.y));
    const double arx = rad2deg(std::atan2(sc.x - array.rx_position_x, sc.y));
    for (std::size_t i = 0; i < ntx; ++i) gtx[i] = beam_gain(array, Side::tx, i, atx);
    for (std::size_t j = 0; j < nrx; ++j) grx[j] = beam_gain(array, Side::rx, j, arx);
    const double amp = sc.reflectivity / (dtx * dtx * drx * drx);
    for (std::size_t i = 0; i < ntx; ++i) {
      for (std::size_t j = 0; j < nrx; ++j) lin[i * nrx + j] += amp * gtx[i] * grx[j];
    }
  }
  SweepFrame f;
  f.gesture_id = static_cast<std::uint32_t>(scene.gesture_id);
  f.power.resize(lin.size());
  std::normal_distribution<double> noise(0.0, opt.noise_std_db > 0 ? opt.noise_std_db : 1.0);
  for (std::size_t k = 0; k < lin.size(); ++k) {
    f.power[k] = 10.0 * std::log10(lin[k] + opt.floor);
    if (opt.noise_std_db > 0) f.power[k] += noise(rng);
  }
  return f;
}

struct SceneConfig {
  std::size_t subjects = 7;
  std::size_t sequences = 7;
  double seconds_per_gesture = 10.0;
  double noise_std_db = 1.0;
  double lateral_squeeze = 1.0;
  std::uint64_t seed = 1;

  static SceneConfig desk_scale() {
    SceneConfig c;
    c.subjects = 2;
    c.sequences = 2;
    return c;
  }
};

inline std::size_t frames_per_gesture(const SceneConfig& scene, const SweepTiming& timing) {
  return static_cast<std::size_t>(std::llround(scene.seconds_per_gesture * timing.sweeps_per_second));
}

inline std::size_t session_frame_count(const SceneConfig& scene, const SweepTiming& timing) {
  return scene.subjects * scene.sequences * kGestures * frames_per_gesture(scene, timing);
}

inline SubjectGeometry subject_geometry(std::uint64_t seed, std::size_t subject, double lateral_squeeze = 1.0) {
  std::mt19937_64 rng(derive_seed(seed, {0x5b, subject}));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SubjectGeometry g;
  g.distance = 1.5 + 0.2 * u(rng);
  g.lateral_offset = 0.1 * u(rng);
  g.scale = 1.0 + 0.1 * u(rng);
  g.lateral_squeeze = lateral_squeeze;
  return g;
}

// Every subject performs `sequences` passes over all 8 gestures in order,
// holding each for seconds_per_gesture. Each frame draws its noise from its
// own counter-derived generator, so the stream is a pure function of the
// configuration.
inline FrameStore generate_session(const SceneConfig& scene, const ArrayConfig& array = {},
                                   const SweepTiming& timing = {}) {
  array.validate();
  timing.validate(array);
  if (scene.subjects < 1 || scene.sequences < 1) throw ConfigError("subjects and sequences must be >= 1");
  const std::size_t per_gesture = frames_per_gesture(scene, timing);
  if (per_gesture < 1) throw ConfigError("seconds_per_gesture yields no sweeps");

  FrameStore store(array.n_tx_beams, array.n_rx_beams);
  store.reserve(session_frame_count(scene, timing));
  std::uint64_t sweep = 0;
  const RenderOptions opt{scene.noise_std_db};
  for (std::size_t subj = 0; subj < scene.subjects; ++subj) {
    const auto body = subject_geometry(scene.seed, subj, scene.lateral_squeeze);
    for (std::size_t seq = 0; seq < scene.sequences; ++seq) {
      for (std::size_t g = 0; g < kGestures; ++g) {
        std::mt19937_64 seq_rng(derive_seed(scene.seed, {0x5e, subj, seq, g}));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double phase0 = u(seq_rng);
        SubjectGeometry pose = body;
        pose.lateral_offset += 0.03 * (2.0 * u(seq_rng) - 1.0);
        pose.distance += 0.03 * (2.0 * u(seq_rng) - 1.0);
        const double period = gesture_period(static_cast<int>(g));
        for (std::size_t k = 0; k < per_gesture; ++k) {
          const double t = static_cast<double>(k) / timing.sweeps_per_second;
          const double phase = period > 0 ? phase0 + t / period : phase0;
          const auto state = gesture_trajectory(static_cast<int>(g), phase, pose);
          std::mt19937_64 frame_rng(derive_seed(scene.seed, {0xf7, subj, seq, g, k}));
          auto frame = render_frame(state, array, opt, frame_rng);
          frame.sweep_index = sweep++;
          frame.subject_id = static_cast<std::uint32_t>(subj);
          frame.sequence_id = static_cast<std::uint32_t>(seq);
          store.push_back(frame);
        }
      }
    }
  }
  return store;
}

}  // namespace isac::sweepgen
