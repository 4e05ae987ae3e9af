#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "chsim/config.hpp"
#include "chsim/diagnostics.hpp"
#include "chsim/errors.hpp"
#include "chsim/init.hpp"
#include "chsim/io.hpp"
#include "chsim/models.hpp"

namespace chsim {

struct RunOutcome {
    int status = 0;   ///< 0 success, 3 instability
    long final_step = 0;
    DiagRecord final_record;
    std::string csv_path;
};

namespace detail {

inline std::string zero_padded(long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*ld", width, v);
    return buf;
}

class OutputWriter {
public:
    OutputWriter(const RunConfig& cfg) : cfg_(cfg) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(cfg.output.dir, ec);
        if (ec) throw IoError("cannot create output directory '" + cfg.output.dir + "'");
        if (cfg_.output.csv) {
            csv_path_ = cfg_.output.dir + "/diag.csv";
            csv_.open(csv_path_, std::ios::trunc);
            if (!csv_) throw IoError("cannot open '" + csv_path_ + "' for writing");
            csv_ << csv_header();
        }
    }

    void diag_row(const DiagRecord& r) {
        if (!csv_.is_open()) return;
        csv_ << csv_row(r);
        if (!csv_) throw IoError("failed while writing '" + csv_path_ + "'");
    }

    void snapshot(const SimState& s, double eps) {
        const std::string tag = zero_padded(s.step, 8);
        if (cfg_.output.raw)
            write_snapshot(cfg_.output.dir + "/state_" + tag + ".chf", s, eps);
        if (cfg_.output.pgm) {
            if (s.u.grid().dim() == 2) {
                write_pgm(cfg_.output.dir + "/u_" + tag + ".pgm", s.u);
            } else {
                for (int axis : cfg_.output.slice_axes)
                    write_pgm(cfg_.output.dir + "/u_" + tag + "_ax" + std::to_string(axis) +
                                  ".pgm",
                              midplane_slice(s.u, axis));
            }
        }
    }

    void finish() {
        if (csv_.is_open()) {
            csv_.flush();
            if (!csv_) throw IoError("failed while writing '" + csv_path_ + "'");
        }
    }

    const std::string& csv_path() const { return csv_path_; }

private:
    const RunConfig& cfg_;
    std::ofstream csv_;
    std::string csv_path_;
};

/// Wall-clock metadata goes to a separate file so the CSV stays byte-stable
/// across reruns.
inline void write_meta(const RunConfig& cfg, int status, long final_step, double wall_seconds) {
    nlohmann::json meta;
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta["written_at"] = stamp;
    meta["wall_seconds"] = wall_seconds;
    meta["status"] = status;
    meta["final_step"] = final_step;
    meta["model"] = model_name(cfg.params.model);
    std::ofstream os(cfg.output.dir + "/meta.json", std::ios::trunc);
    os << meta.dump(2) << "\n";
}

} // namespace detail

/// Execute the time loop of a validated configuration: diagnostics every
/// diag_stride steps (plus step 0 and the final step), snapshots and images
/// every snapshot_stride steps (plus the final step). On a non-finite state
/// the last diagnostic row is still written and the outcome status is 3.
/// Progress goes to stderr only.
inline RunOutcome run(const RunConfig& cfg,
                      const std::optional<std::string>& resume_snapshot = std::nullopt) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::OutputWriter out(cfg);

    SimState state = [&] {
        if (resume_snapshot) {
            Snapshot snap = read_snapshot(*resume_snapshot);
            if (snap.grid != cfg.grid)
                throw ConfigError("resume snapshot grid does not match the configuration");
            if (snap.eps != cfg.params.epsilon)
                throw ConfigError("resume snapshot eps does not match the configuration");
            SimState s{std::move(snap.u), std::move(snap.mu), 0, snap.time};
            s.step = std::llround(snap.time / cfg.params.dt);
            return s;
        }
        return make_initial_state(cfg.init, cfg.grid, cfg.params);
    }();

    if (state.step > cfg.schedule.steps)
        throw ConfigError("resume snapshot is already past the scheduled step count");

    const Stepper stepper(cfg.params, cfg.grid);
    const long total = cfg.schedule.steps;
    const long diag_stride = cfg.schedule.diag_stride;
    const long snap_stride = cfg.schedule.snapshot_stride;

    auto want_diag = [&](long step) { return step % diag_stride == 0 || step == total; };
    auto want_snap = [&](long step) {
        return (step > 0 && step % snap_stride == 0) || step == total;
    };

    RunOutcome outcome;
    outcome.csv_path = out.csv_path();

    DiagRecord rec = diagnose(state, cfg.params.epsilon);
    if (want_diag(state.step)) out.diag_row(rec);
    if (want_snap(state.step) && state.step > 0) out.snapshot(state, cfg.params.epsilon);

    int status = 0;
    const long report_every = std::max(total / 20, 1L);
    try {
        while (state.step < total) {
            stepper.advance(state);
            if (want_diag(state.step)) {
                rec = diagnose(state, cfg.params.epsilon);
                out.diag_row(rec);
            }
            if (want_snap(state.step)) out.snapshot(state, cfg.params.epsilon);
            if (state.step % report_every == 0)
                std::fprintf(stderr, "chsim: step %ld/%ld\n", state.step, total);
        }
    } catch (const InstabilityError& e) {
        // Final diagnostic row for the diverged state, then report status 3.
        std::fprintf(stderr, "chsim: %s\n", e.what());
        rec = DiagRecord{};
        rec.step = e.step();
        rec.time = static_cast<double>(e.step()) * cfg.params.dt;
        rec.energy = std::numeric_limits<double>::quiet_NaN();
        rec.mass = std::numeric_limits<double>::quiet_NaN();
        rec.volume = std::numeric_limits<double>::quiet_NaN();
        rec.u_min = -e.max_abs_u();
        rec.u_max = e.max_abs_u();
        rec.overshoot = std::numeric_limits<double>::quiet_NaN();
        out.diag_row(rec);
        status = 3;
    }
    out.finish();

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_meta(cfg, status, state.step, wall);

    outcome.status = status;
    outcome.final_step = state.step;
    outcome.final_record = rec;
    return outcome;
}

} // namespace chsim
