# Library modules: geometry, profiles, transforms, hypotheses, barriers, certificates
