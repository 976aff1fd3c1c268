// Hand-built payload fixtures, with deliberately awkward floats so any
// client-side rounding or recomputation shows up as a mismatch.

import type { GeneralQbafPayload, InferencePayload } from "../src/types";

export const GENERAL_X: GeneralQbafPayload = {
  option: { id: "option-x", name: "Option X", description: "" },
  root: "root",
  arguments: [
    { id: "root", text: "Option X is an appropriate option.", base_score: 0.5 },
    {
      id: "a1",
      text: "It is contraindicated for this profile.",
      base_score: 0.8,
      nl_condition: "performance status below 50",
      condition: { properties: { kps: { type: "integer", maximum: 49 } } },
    },
    {
      id: "a1.s1",
      text: "The contraindication is well evidenced.",
      base_score: 0.9,
      nl_condition: "always",
      condition: {},
    },
    {
      id: "s1",
      text: "Guidelines endorse it for fit patients.",
      base_score: 0.6,
      nl_condition: "performance status at least 70",
      condition: { properties: { kps: { type: "integer", minimum: 70 } } },
    },
  ],
  attacks: [
    ["a1", "root"],
    ["a1.s1", "a1"],
  ] as [string, string][],
  supports: [["s1", "root"]] as [string, string][],
};

export const GENERAL_Y: GeneralQbafPayload = {
  option: { id: "option-y", name: "Option Y", description: "" },
  root: "root",
  arguments: [{ id: "root", text: "Option Y is an appropriate option.", base_score: 0.5 }],
  attacks: [],
  supports: [],
};

export const INFERENCE_FIXTURE: InferencePayload = {
  revision: 3,
  params: { values: { kps: 90, age: 75 }, unknown: ["mgmt_methylation_status"] },
  results: [
    {
      option: { id: "option-x", name: "Option X" },
      score: 0.8,
      qbaf: {
        root: "root",
        arguments: [
          { id: "root", text: "Option X is an appropriate option.", base_score: 0.5 },
          { id: "s1", text: "Guidelines endorse it for fit patients.", base_score: 0.6 },
        ],
        attacks: [],
        supports: [["s1", "root"]] as [string, string][],
      },
      strengths: { root: 0.8, s1: 0.6 },
      removed: [
        {
          id: "a1",
          text: "It is contraindicated for this profile.",
          base_score: 0.8,
          reason: "condition-unsatisfied",
          condition: { properties: { kps: { type: "integer", maximum: 49 } } },
        },
        {
          id: "a1.s1",
          text: "The contraindication is well evidenced.",
          base_score: 0.9,
          reason: "ancestor-removed",
          ancestor: "a1",
        },
      ],
      params: { values: { kps: 90, age: 75 }, unknown: ["mgmt_methylation_status"] },
    },
    {
      option: { id: "option-y", name: "Option Y" },
      score: 0.30000000000000004,
      qbaf: {
        root: "root",
        arguments: [
          { id: "root", text: "Option Y is an appropriate option.", base_score: 0.5 },
        ],
        attacks: [],
        supports: [],
      },
      strengths: { root: 0.30000000000000004 },
      removed: [],
      params: { values: { kps: 90, age: 75 }, unknown: [] },
    },
  ],
  errors: [],
};
