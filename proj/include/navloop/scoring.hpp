#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navloop/core.hpp"

namespace navloop {

struct Reward {
    double total = 0.0;
    double timeComponent = 0.0;
    double distanceComponent = 0.0;
};

// R = beta1*exp(-alpha1*t) + beta2*exp(-alpha2*d), reported with both terms.
// Throws std::invalid_argument for non-finite or negative t, d.
Reward raw_reward(double t, double d, const ScoreConstants& c);

// round(scaleFactor * R), half away from zero, clamped at 0 when floorAtZero.
long long displayed_score(double reward, const ScoreConstants& c);

// Post-trial feedback policy. The engine only talks to this interface, so a
// different feedback rule can be dropped in without touching the session code.
class FeedbackFunction {
public:
    virtual ~FeedbackFunction() = default;
    virtual Reward evaluate(double t, double d) const = 0;
    virtual long long present(const Reward& r) const = 0;
};

class DecayingRewardFeedback final : public FeedbackFunction {
public:
    explicit DecayingRewardFeedback(ScoreConstants c) : constants_(c) {}
    Reward evaluate(double t, double d) const override { return raw_reward(t, d, constants_); }
    long long present(const Reward& r) const override { return displayed_score(r.total, constants_); }
    const ScoreConstants& constants() const { return constants_; }

private:
    ScoreConstants constants_;
};

// Feedback that just reports how far away the participant ended up, in cm.
class DistanceOnlyFeedback final : public FeedbackFunction {
public:
    Reward evaluate(double /*t*/, double d) const override { return {d, 0.0, d}; }
    long long present(const Reward& r) const override;
};

// ---------------------------------------------------------------------------
// Leaderboard

enum class LeaderboardMode { Real, Fake, Practice };

std::string_view to_string(LeaderboardMode m);
std::optional<LeaderboardMode> leaderboard_mode_from_string(std::string_view s);

struct LeaderboardEntry {
    std::string participantId;
    long long score = 0;
    double timestamp = 0.0;
    friend bool operator==(const LeaderboardEntry&, const LeaderboardEntry&) = default;
};

struct Placement {
    std::optional<int> rank;  // 1-based; empty when the score is below the board
    bool isNewHigh = false;   // entered the board (or, in Practice, would have)
    bool practice = false;
    long long score = 0;
    bool below_board() const { return !rank.has_value(); }
};

class Leaderboard {
public:
    static constexpr std::size_t kCapacity = 10;

    Leaderboard() = default;
    // `entries` need not be sorted; they are stably sorted and trimmed to ten.
    Leaderboard(std::vector<LeaderboardEntry> entries, LeaderboardMode mode);

    LeaderboardMode mode() const { return mode_; }
    const std::vector<LeaderboardEntry>& entries() const { return entries_; }
    const std::vector<LeaderboardEntry>& persisted_snapshot() const { return snapshot_; }

    // Real and Fake insert when the score makes the top ten (ties go below
    // existing equal scores); Practice only reports where it would land.
    // Throws std::invalid_argument for negative scores.
    Placement submit(const std::string& participantId, long long score, double timestamp = 0.0);

    // Fake mode only: restore the entries loaded at participant start.
    // Throws std::logic_error otherwise.
    void reset_for_participant();

    // Entries that should be written back to disk, if any (Real mode only).
    std::optional<std::vector<LeaderboardEntry>> entries_to_persist() const;

private:
    std::size_t insertion_index(long long score) const;

    std::vector<LeaderboardEntry> entries_;
    std::vector<LeaderboardEntry> snapshot_;
    LeaderboardMode mode_ = LeaderboardMode::Real;
};

}  // namespace navloop
