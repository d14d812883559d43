#include <math.h>
#include <stdio.h>

#include "bergman_density.h"

int main(void) {
    BdGeometry *geom = NULL;
    if (bd_geometry_new(-2.0, &geom) != BD_STATUS_OK) {
        return 1;
    }
    BdDensityReport report;
    if (bd_density_estimate(geom, 1000, 0.0, 1e-12, &report) != BD_STATUS_OK) {
        return 2;
    }
    if (fabs(report.density - 999.0) > 1e-9) {
        return 3;
    }
    double g = 0.0;
    if (bd_metric_density(geom, 2.0, 0.0, &g) != BD_STATUS_DOMAIN || bd_last_error_message() == NULL) {
        return 4;
    }
    bd_geometry_free(geom);

    double entries[8] = {2.0, 0.0, 0.5, 0.5, 0.5, -0.5, 1.0, 0.0};
    BdGram *gram = NULL;
    if (bd_gram_from_entries(2, entries, NULL, &gram) != BD_STATUS_OK) {
        return 5;
    }
    BdSchur s;
    double inv = 0.0;
    if (bd_gram_schur_i00(gram, &s) != BD_STATUS_OK || bd_gram_inverse00(gram, &inv) != BD_STATUS_OK) {
        return 6;
    }
    bd_gram_free(gram);
    /* det = 2 - 0.5 = 1.5, (F^-1)_00 = 1 / 1.5 */
    if (fabs(s.value - 2.0 / 3.0) > 1e-15 || fabs(inv - 2.0 / 3.0) > 1e-15) {
        return 7;
    }
    printf("density %.17g\n", report.density);
    return 0;
}
