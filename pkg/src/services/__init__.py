# Services package: ingest, profiling, quality detectors, remediation, lineage and reporting
