#include <stdio.h>
#include <string.h>

#include "zmetrics.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "check failed at line %d: %s\n", __LINE__, \
                    #cond);                                           \
            return 1;                                                 \
        }                                                             \
    } while (0)

static const char *SPEC =
    "given NAT\n"
    "schema Counter\n  decl ctr : NAT\nend\n"
    "schema Inc\n  delta Counter\n  decl amt? : NAT\n"
    "  pred amt? > 0\n  pred ctr' = ctr + amt?\nend\n";

static const char *CODE =
    "procedure Inc_Ctr (Amt : in Integer) is\n"
    "   Tmp : Integer;\n"
    "begin\n"
    "   if Amt > 0 then\n"
    "      Ctr := Ctr + Amt;\n"
    "   end if;\n"
    "end Inc_Ctr;\n";

int main(void) {
    ZmSpec *spec = NULL;
    CHECK(zm_spec_parse(SPEC, &spec) == ZM_STATUS_OK);
    CHECK(zm_spec_schema_count(spec) == 2);
    CHECK(strcmp(zm_spec_schema_name(spec, 0), "Counter") == 0);
    ZmSpecMetrics sm;
    CHECK(zm_spec_metrics(spec, 1, &sm) == ZM_STATUS_OK);
    CHECK(sm.cc == 5 && sm.du == 4 && sm.cov == 1.0);

    ZmCode *code = NULL;
    CHECK(zm_code_parse(CODE, &code) == ZM_STATUS_OK);
    ZmCodeMetrics cm;
    CHECK(zm_code_metrics(code, 0, &cm) == ZM_STATUS_OK);
    CHECK(cm.cl == 7 && cm.clcd == 1 && cm.clce == 3 && cm.cyc == 2);

    ZmSpec *bad = NULL;
    CHECK(zm_spec_parse("schema A\n  pred x = \nend\n", &bad) == ZM_STATUS_PARSE);
    char *message = zm_last_error_message();
    CHECK(message != NULL && strncmp(message, "<input>:2:", 10) == 0);
    zm_string_free(message);

    double x[] = {1, 2, 3, 4, 5, 6};
    double y[] = {3.5, 5, 6.5, 8, 9.5, 11};
    const char *names[] = {"CC"};
    ZmModel *model = NULL;
    CHECK(zm_model_fit(x, 6, 1, names, y, "CL", 0.4, &model) == ZM_STATUS_OK);
    char *formula = zm_model_formula(model);
    CHECK(strcmp(formula, "CL(M) = 1.500*CC + 2.000") == 0);
    zm_string_free(formula);
    double predicted = 0;
    CHECK(zm_model_predict(model, &sm, &predicted) == ZM_STATUS_OK);
    CHECK(predicted > 9.4999 && predicted < 9.5001);

    zm_model_free(model);
    zm_code_free(code);
    zm_spec_free(spec);
    puts("ok");
    return 0;
}
