#include "navloop/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace navloop {

Reward raw_reward(double t, double d, const ScoreConstants& c) {
    if (!std::isfinite(t) || !std::isfinite(d)) throw std::invalid_argument("raw_reward: non-finite input");
    if (t < 0.0 || d < 0.0) throw std::invalid_argument("raw_reward: t and d must be >= 0");
    Reward r;
    r.timeComponent = c.beta1 * std::exp(-c.alpha1 * t);
    r.distanceComponent = c.beta2 * std::exp(-c.alpha2 * d);
    r.total = r.timeComponent + r.distanceComponent;
    return r;
}

long long displayed_score(double reward, const ScoreConstants& c) {
    if (!std::isfinite(reward)) throw std::invalid_argument("displayed_score: non-finite reward");
    const long long scaled = std::llround(c.scaleFactor * reward);
    return c.floorAtZero ? std::max(0LL, scaled) : scaled;
}

long long DistanceOnlyFeedback::present(const Reward& r) const { return std::llround(r.total * 100.0); }

std::string_view to_string(LeaderboardMode m) {
    switch (m) {
        case LeaderboardMode::Real: return "Real";
        case LeaderboardMode::Fake: return "Fake";
        case LeaderboardMode::Practice: return "Practice";
    }
    return "Real";
}

std::optional<LeaderboardMode> leaderboard_mode_from_string(std::string_view s) {
    if (s == "Real") return LeaderboardMode::Real;
    if (s == "Fake") return LeaderboardMode::Fake;
    if (s == "Practice") return LeaderboardMode::Practice;
    return std::nullopt;
}

Leaderboard::Leaderboard(std::vector<LeaderboardEntry> entries, LeaderboardMode mode)
    : entries_(std::move(entries)), mode_(mode) {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const LeaderboardEntry& a, const LeaderboardEntry& b) { return a.score > b.score; });
    if (entries_.size() > kCapacity) entries_.resize(kCapacity);
    snapshot_ = entries_;
}

std::size_t Leaderboard::insertion_index(long long score) const {
    // First position holding a strictly lower score.
    auto it = std::upper_bound(entries_.begin(), entries_.end(), score,
                               [](long long s, const LeaderboardEntry& e) { return s > e.score; });
    return static_cast<std::size_t>(it - entries_.begin());
}

Placement Leaderboard::submit(const std::string& participantId, long long score, double timestamp) {
    if (score < 0) throw std::invalid_argument("leaderboard: negative score");
    Placement p;
    p.score = score;
    p.practice = mode_ == LeaderboardMode::Practice;

    const std::size_t idx = insertion_index(score);
    if (idx >= kCapacity) return p;

    p.rank = static_cast<int>(idx) + 1;
    p.isNewHigh = true;
    if (mode_ == LeaderboardMode::Practice) return p;

    entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(idx), LeaderboardEntry{participantId, score, timestamp});
    if (entries_.size() > kCapacity) entries_.pop_back();
    return p;
}

void Leaderboard::reset_for_participant() {
    if (mode_ != LeaderboardMode::Fake) throw std::logic_error("leaderboard: reset is only valid for a fake board");
    entries_ = snapshot_;
}

std::optional<std::vector<LeaderboardEntry>> Leaderboard::entries_to_persist() const {
    if (mode_ != LeaderboardMode::Real) return std::nullopt;
    return entries_;
}

}  // namespace navloop
