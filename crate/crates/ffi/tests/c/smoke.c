#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ridgeprec.h"

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    const double y[] = {1.0, 0.5, -0.3, 2.0, -1.0, 0.4, 0.2, 0.1, -0.7, 1.1, 0.3, 0.9};
    RpMatrix *s = NULL;
    CHECK(rp_sample_cov(y, 4, 3, false, &s) == RP_OK);
    CHECK(rp_matrix_order(s) == 3);

    RpTarget t = {RP_TARGET_SCALAR, 2.0, NULL};
    RpEstimate *est = NULL;
    CHECK(rp_fit(RP_ESTIMATOR_ALT_1, s, &t, 0.5, &est) == RP_OK);
    RpMatrix *omega = NULL;
    CHECK(rp_estimate_omega(est, &omega) == RP_OK);
    double w[9];
    CHECK(rp_matrix_copy(omega, w, 9) == RP_OK);
    CHECK(w[1] == w[3] && w[0] > 0.0);

    CHECK(rp_fit(RP_ESTIMATOR_ALT_2, s, NULL, -1.0, &est) == RP_ERR_INVALID_PENALTY);
    CHECK(strstr(rp_last_error_message(), "penalty") != NULL);

    double lambda = 0.0;
    CHECK(rp_select_lambda(y, 4, 3, RP_ESTIMATOR_ALT_2, NULL, RP_SCHEME_APPROX_LOOCV, 0, 0, NULL, 0, &lambda) == RP_OK);
    CHECK(lambda > 0.0 && isfinite(lambda));

    printf("ok %s\n", rp_version());
    rp_matrix_free(omega);
    rp_estimate_free(est);
    rp_matrix_free(s);
    return 0;
}
