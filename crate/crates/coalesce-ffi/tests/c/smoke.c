#include <math.h>
#include <stdio.h>
#include <string.h>
#include "coalesce.h"

#define CHECK(cond, ...)                     \
    do {                                     \
        if (!(cond)) {                       \
            fprintf(stderr, __VA_ARGS__);    \
            fputc('\n', stderr);             \
            return 1;                        \
        }                                    \
    } while (0)

int main(void) {
    CoalesceForcing *f = NULL;
    CHECK(coalesce_forcing_single(0.5, 1, 3, &f) == COALESCE_OK, "forcing");

    CoalesceTrajectory *t = NULL;
    CHECK(coalesce_integrate(f, 0.15, 1e-5, 20.0, 1e-10, &t) == COALESCE_OK, "integrate");
    size_t n = coalesce_trajectory_len(t);
    CHECK(n > 1000, "samples %zu", n);
    double w;
    CoalesceComplex phi;
    CHECK(coalesce_trajectory_sample(t, n - 1, &w, &phi) == COALESCE_OK, "sample");
    CHECK(fabs(w - 20.0) < 1e-12, "last w %g", w);

    double amp, wl;
    CHECK(coalesce_trajectory_measure(t, NAN, NAN, &amp, &wl) == COALESCE_OK, "measure");
    CHECK(fabs(wl / (2 * M_PI * 0.15) - 1) < 0.05, "wavelength %g", wl);

    double omega;
    CHECK(coalesce_omega_separated(1, 3, &omega) == COALESCE_OK, "omega");
    CHECK(fabs(omega - 0.351) < 0.005, "omega %g", omega);

    CoalesceAmplitude pred;
    CHECK(coalesce_amp_single(0.5, 1, 3, 0.15, omega, &pred) == COALESCE_OK, "amp");
    CHECK(pred.regime == COALESCE_REGIME_SINGLE, "regime");
    CHECK(amp > 0.3 * pred.amplitude && amp < pred.amplitude, "numeric %g predicted %g", amp, pred.amplitude);

    CoalesceSequence *s = NULL;
    CHECK(coalesce_sequence_separated(1, 3, 100, &s) == COALESCE_OK, "sequence");
    CHECK(coalesce_sequence_len(s) == 101, "len");
    CoalesceComplex l;
    CHECK(coalesce_sequence_ln(s, 100, &l) == COALESCE_OK, "ln");
    CHECK(isfinite(l.re), "ln A_100");

    double occ, tau;
    CHECK(coalesce_omega_cc(1, 6, 1, 6, 0.5, 0.05, 0, &occ, &tau) == COALESCE_OK, "omega_cc");
    CHECK(fabs(occ / omega - 1) < 0.01, "omega_cc %g", occ);

    CHECK(coalesce_amp_coalescing(0.5, 1.0, 1, 4, 1, 4, 0.1, 0.3, &pred) == COALESCE_ERR_WRONG_REGIME, "regime check");
    char buf[256];
    size_t len = coalesce_last_error_message(buf, sizeof buf);
    CHECK(len > 0 && strstr(buf, "1/3") != NULL, "message '%s'", buf);

    coalesce_sequence_free(s);
    coalesce_trajectory_free(t);
    coalesce_forcing_free(f);
    puts("ok");
    return 0;
}
