/* Prints the margin of a probability vector and exercises error reporting. */
#include <stdio.h>

#include "alsim.h"

int main(void) {
    const double probs[] = {0.2, 0.5, 0.3};
    double margin = 0.0;
    if (alsim_margin_score(probs, 3, &margin) != ALSIM_STATUS_OK) {
        fprintf(stderr, "unexpected failure: %s\n", alsim_last_error());
        return 1;
    }
    printf("margin %.3f\n", margin);

    AlsimConfig *config = NULL;
    AlsimStatus status = alsim_config_load("/nonexistent.toml", &config);
    printf("load status %d: %s\n", (int)status, alsim_last_error());
    alsim_config_free(config);
    return status == ALSIM_STATUS_IO ? 0 : 1;
}
