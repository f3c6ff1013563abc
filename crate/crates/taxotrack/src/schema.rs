//! JSON Schemas for the API payloads, served at `/api/schema`.

use serde_json::{json, Value};

use crate::service::SCHEMA_VERSION;

pub fn schema() -> Value {
    let number = json!({ "type": "number" });
    let zone = json!({ "type": "integer", "minimum": 0, "maximum": 3 });
    let combination = json!({
        "type": "string",
        "enum": taxotrack_core::valid_combinations().iter().map(|c| c.name()).collect::<Vec<_>>()
    });
    let series = json!({ "type": "array", "items": number });
    let point = json!({
        "type": "object",
        "required": ["lon", "lat", "t"],
        "properties": { "lon": number, "lat": number, "t": number }
    });
    let features = json!({
        "type": "object",
        "required": ["speed", "acceleration", "angle", "distance", "bearing"],
        "properties": {
            "speed": series, "acceleration": series, "angle": series, "distance": series, "bearing": series
        }
    });
    let ranked = json!({
        "type": "array",
        "items": {
            "type": "object",
            "required": ["variable", "importance"],
            "properties": { "variable": { "type": "string" }, "importance": number }
        }
    });
    let pair = json!({ "type": "array", "items": number, "minItems": 2, "maxItems": 2 });
    let window = json!({
        "type": "object",
        "required": ["trajectory_id", "variable", "kind", "anchor", "statistic", "start", "end", "points", "features"],
        "properties": {
            "trajectory_id": { "type": "string" },
            "variable": { "type": "string" },
            "kind": { "enum": ["anchored", "signature_segment"] },
            "anchor": { "type": ["integer", "null"] },
            "statistic": number,
            "start": { "type": "integer" },
            "end": { "type": "integer" },
            "points": { "type": "array", "items": point },
            "features": features
        }
    });
    json!({
        "version": SCHEMA_VERSION,
        "types": {
            "ZonedScore": {
                "type": "object",
                "required": ["trajectory_id", "combination", "x", "y", "zone"],
                "properties": {
                    "trajectory_id": { "type": "string" },
                    "combination": combination,
                    "x": number, "y": number, "zone": zone
                }
            },
            "FrequencyMatrix": {
                "type": "object",
                "required": ["rows"],
                "properties": {
                    "rows": {
                        "type": "array", "minItems": 7, "maxItems": 7,
                        "items": {
                            "type": "object",
                            "required": ["combination", "counts"],
                            "properties": {
                                "combination": combination,
                                "counts": { "type": "array", "items": { "type": "integer" }, "minItems": 4, "maxItems": 4 }
                            }
                        }
                    }
                }
            },
            "EvalMetrics": {
                "type": "object",
                "required": ["f1", "accuracy", "precision", "recall", "f1_per_class", "test_size", "confusion"],
                "properties": {
                    "f1": number, "accuracy": number,
                    "precision": pair, "recall": pair, "f1_per_class": pair,
                    "test_size": { "type": "integer" },
                    "confusion": { "type": "array", "items": { "type": "array", "items": { "type": "integer" } } }
                }
            },
            "ComparisonReport": {
                "type": "object",
                "required": ["combination", "zone_a", "zone_b", "members", "train_size", "metrics", "importance_defined", "column_x", "column_y"],
                "properties": {
                    "combination": combination,
                    "zone_a": zone, "zone_b": zone,
                    "members": { "type": "array", "items": { "type": "integer" } },
                    "train_size": { "type": "integer" },
                    "metrics": { "$ref": "#/types/EvalMetrics" },
                    "importance_defined": { "type": "boolean" },
                    "column_x": ranked, "column_y": ranked
                }
            },
            "Trajectory": {
                "type": "object",
                "required": ["id", "points"],
                "properties": {
                    "id": { "type": "string" },
                    "points": { "type": "array", "items": point },
                    "features": features
                }
            },
            "SampleWindow": window,
            "SamplePair": {
                "type": "object",
                "required": ["variable", "windows", "color_scale"],
                "properties": {
                    "variable": { "type": "string" },
                    "windows": { "type": "array", "items": { "$ref": "#/types/SampleWindow" }, "minItems": 2, "maxItems": 2 },
                    "color_scale": {
                        "type": ["object", "null"],
                        "properties": { "min": number, "max": number }
                    }
                }
            },
            "CompareRequest": {
                "type": "object",
                "required": ["combo", "zone_a", "zone_b"],
                "properties": { "combo": { "type": "string" }, "zone_a": zone, "zone_b": zone }
            },
            "Error": {
                "type": "object",
                "required": ["error"],
                "properties": {
                    "error": {
                        "type": "object",
                        "required": ["code", "message"],
                        "properties": {
                            "code": { "type": "string" },
                            "message": { "type": "string" },
                            "reason": { "enum": ["same_node", "parent_child", "mixed_levels"] }
                        }
                    }
                }
            }
        }
    })
}
