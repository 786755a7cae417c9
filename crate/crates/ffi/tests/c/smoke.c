#include <math.h>
#include <stdio.h>
#include <string.h>

#include "statgamma.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, sg_last_error());                          \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    double times[4] = {0.0, 1.0, 2.0, 3.0};
    SgEnsemble *ens = NULL;
    CHECK(sg_simulate(SG_PROCESS_THINNED, 2.0, 1.0, 0.5, times, 4, 10, 42, NULL, &ens) == SG_STATUS_OK);
    CHECK(sg_ensemble_n_paths(ens) == 10);
    CHECK(sg_ensemble_n_times(ens) == 4);

    double path[4];
    CHECK(sg_ensemble_copy_path(ens, 3, path, 4) == SG_STATUS_OK);
    CHECK(memcmp(path, sg_ensemble_values(ens) + 12, sizeof path) == 0);
    CHECK(sg_ensemble_copy_path(ens, 10, path, 4) == SG_STATUS_OUT_OF_RANGE);
    sg_ensemble_free(ens);

    SgSimOptions opts = sg_sim_options_default();
    opts.cir_method = SG_CIR_METHOD_SQUARED_OU;
    CHECK(sg_simulate(SG_PROCESS_SQUARED_OU, 2.0, 1.0, 0.5, times, 4, 5, 1, &opts, &ens) == SG_STATUS_OK);
    sg_ensemble_free(ens);

    CHECK(sg_simulate(SG_PROCESS_AR1, 2.0, 1.0, 1.5, times, 4, 5, 1, NULL, &ens) == SG_STATUS_INVALID_ARGUMENT);
    CHECK(ens == NULL);
    CHECK(strstr(sg_last_error(), "rho") != NULL);

    SgComplex z;
    CHECK(sg_gamma_chf(1.0, 1.0, 1.0, &z) == SG_STATUS_OK);
    CHECK(fabs(z.re - 0.5) < 1e-15 && fabs(z.im - 0.5) < 1e-15);
    CHECK(sg_pair_chf(SG_PROCESS_CONTINUOUSLY_THINNED, 1.0, 1.0, 2.0, 1.0, 0.5, &z) == SG_STATUS_UNSUPPORTED);

    double v;
    CHECK(sg_gamma_survival(2.0, 1.0, 1.0, &v) == SG_STATUS_OK);
    CHECK(fabs(v - exp(-2.0)) < 1e-15);
    CHECK(isnan(sg_log_bessel_i(0.0, -1.0)));
    CHECK(strlen(sg_version()) > 0);
    printf("ok\n");
    return 0;
}
