#ifndef TENNISPROB_H
#define TENNISPROB_H

#include <stdbool.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum TpStatus {
  TP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_PARAMETER = 2,
  /**
   * A tie-breaker reachable with positive probability never ends.
   */
  TP_STATUS_NON_TERMINATING = 3,
  TP_STATUS_NUMERICAL = 4,
  /**
   * The library panicked; treat the handle as unusable.
   */
  TP_STATUS_PANIC = 5,
} TpStatus;

typedef enum TpTieBreak {
  TP_TIE_BREAK_SG = 0,
  TP_TIE_BREAK_STTG = 1,
  TP_TIE_BREAK_STTP = 2,
} TpTieBreak;

/**
 * Opaque model: a scoring system with its serve probabilities.
 */
typedef struct TpModel TpModel;

typedef struct TpSimSummary {
  uint64_t replications;
  uint64_t capped_replications;
  double win_rate_a;
  double win_rate_a_se;
  double mean_points;
  double mean_points_se;
  double std_points;
  double std_points_se;
} TpSimSummary;

typedef struct TpEfficiency {
  double value;
  double error_estimate;
} TpEfficiency;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Game tie-breaker (deuce) for a server winning each point with `p`.
 */
enum TpStatus tp_gt_new(double p, struct TpModel **out);

enum TpStatus tp_game_new(double p, struct TpModel **out);

/**
 * First to `l + 1` points with a single server.
 */
enum TpStatus tp_bofk_new(double p, uint32_t l, struct TpModel **out);

enum TpStatus tp_stt_new(double pa, double pb, struct TpModel **out);

enum TpStatus tp_st_new(double pa, double pb, uint32_t k, struct TpModel **out);

enum TpStatus tp_set_new(double pa, double pb, uint32_t k, struct TpModel **out);

/**
 * Best of 2q+1 sets; ST target `k0` in the first 2q sets, `k1` in the last.
 */
enum TpStatus tp_match_new(double pa,
                           double pb,
                           uint32_t k0,
                           uint32_t k1,
                           uint32_t q,
                           struct TpModel **out);

/**
 * Best of 2l+1 games with tie-break `tiebreak` (a `TpTieBreak` value) at
 * l games all.
 */
enum TpStatus tp_bog_new(double pa, double pb, uint32_t l, uint32_t tiebreak, struct TpModel **out);

/**
 * Selects how A's STT chance is taken when B serves first in it:
 * 0 = exact (default), 1 = swapped odds. Ignored by systems without an ST.
 */
enum TpStatus tp_model_set_tie_rule(struct TpModel *model, bool swapped);

/**
 * Counts the STTG tie-break in games (1) instead of points (0).
 */
enum TpStatus tp_model_set_tie_count_games(struct TpModel *model, bool games);

/**
 * Releases a model; null is ignored.
 */
void tp_model_free(struct TpModel *model);

/**
 * Probability that A (the server or first server) wins.
 */
enum TpStatus tp_win_prob(const struct TpModel *model, double *out);

/**
 * Mean and variance of the points played, by conditioning on final scores.
 */
enum TpStatus tp_points_moments(const struct TpModel *model, double *mean, double *variance);

/**
 * Mean and variance of the points played from the exact joint law of
 * winner and length.
 */
enum TpStatus tp_exact_moments(const struct TpModel *model, double *mean, double *variance);

/**
 * Monte-Carlo run; `cap` is the per-replication point limit (0 = default).
 */
enum TpStatus tp_simulate(const struct TpModel *model,
                          uint64_t replications,
                          uint64_t seed,
                          uint64_t cap,
                          struct TpSimSummary *out);

/**
 * Efficiency of the model's system under Beta(a1, b1) on p (one-server
 * systems) or Beta(a1, b1) x Beta(a2, b2) on (pA, pB). The model's serve
 * probabilities are not used.
 */
enum TpStatus tp_efficiency(const struct TpModel *model,
                            double a1,
                            double b1,
                            double a2,
                            double b2,
                            struct TpEfficiency *out);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENNISPROB_H */
