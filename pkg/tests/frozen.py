"""Reference values frozen from tests/oracles/generate.py (mpmath, 50 digits; exact rationals)."""

QQ_INF_HALF = 0.28878809508660242
POCH_02_HALF_3 = 0.684
PHI21_NONTERM = 4.9917643648019138
PHI32_TERM = 40.703949499599338
PHI10_NONTERM = 3.3376161134477479
U5_Q3_MU2 = 6.509765625
U7_NEG_Q03_MU07 = -991524.29434334778
WEIGHT_1_MU2 = 0.0699037402991846
WEIGHT_NEGQ_MU2 = 0.2097112208975538
KERNEL_I_1_1_MU1 = complex(-0.059273555771999471, 0.3402193350334737)
KERNEL_I_Q_NEGMU_MU2 = complex(-0.095392536654611589, 0.31832145907336232)
COHERENT_NORM_03 = 0.95662689898689206
BI_NORM_POS0 = 30.539335344769938
