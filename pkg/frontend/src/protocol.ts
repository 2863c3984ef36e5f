/**
 * Wire protocol for the session service (see docs/protocol.md in the repo
 * root). Every message is validated with zod on both receive and send; the
 * viewer never trusts or emits anything outside these schemas.
 */
import { z } from "zod";

export const PROTOCOL_VERSION = 1;

const vec3 = z.tuple([z.number(), z.number(), z.number()]);
const quat = z.tuple([z.number(), z.number(), z.number(), z.number()]);
const mat16 = z.array(z.number()).length(16);
const pressures6 = z.array(z.number().min(0).max(1)).length(6);

export const snapshotSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("snapshot"),
  tick: z.number().int().nonnegative(),
  time: z.number().nonnegative(),
  hash: z.string().regex(/^[0-9a-f]{16}$/),
  volume: z.object({
    position: vec3,
    rotation: quat,
    half_extent: z.number().positive(),
    bezel_fraction: z.number().min(0).lt(0.4),
  }),
  head: vec3,
  objects: z.array(
    z.object({
      id: z.string().min(1),
      label: z.string(),
      position: vec3,
      rotation: quat,
      radius: z.number().positive(),
    }),
  ),
  phase: z.enum(["no_candidate", "candidate", "grasped"]),
  candidate: z.string().nullable(),
  grasped: z.string().nullable(),
  bimanual: z.boolean(),
  pressures: pressures6,
  targets: z.array(
    z.object({
      index: z.number().int().nonnegative(),
      center: vec3,
      radius: z.number().positive(),
      required_object: z.string(),
      label: z.string().nullable(),
      appeared_at: z.number(),
      completed_at: z.number().nullable(),
    }),
  ),
  hints_revealed: z.number().int().min(0).max(3),
  fov: z.enum(["narrow", "wide"]),
  cameras: z.array(
    z.object({
      face: z.number().int().min(0).max(5),
      view: mat16,
      projection: mat16,
    }),
  ),
});

export const hintSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("hint"),
  index: z.number().int().min(1).max(3),
  text: z.string().min(1),
});

export const eventSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("event"),
  event: z.string(),
  object: z.string().optional(),
  target: z.number().int().optional(),
  tick: z.number().int().optional(),
  hash: z.string().nullable().optional(),
});

export const errorSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("error"),
  message: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  snapshotSchema,
  hintSchema,
  eventSchema,
  errorSchema,
]);

export type Snapshot = z.infer<typeof snapshotSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;
export type Vec3 = z.infer<typeof vec3>;
export type Quat = z.infer<typeof quat>;

const rawChannel = z.number().int().min(0).max(1023);

export const inputSchema = z.discriminatedUnion("kind", [
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("pose"),
    position: vec3,
    rotation: quat,
  }),
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("head"),
    position: vec3,
  }),
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("pressures"),
    raw: z.array(rawChannel).length(6),
  }),
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("pressure"),
    face: z.number().int().min(0).max(5),
    value: rawChannel,
  }),
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("hint"),
  }),
  z.object({
    v: z.literal(PROTOCOL_VERSION),
    type: z.literal("input"),
    kind: z.literal("fov"),
    value: z.enum(["narrow", "wide"]),
  }),
]);

export type InputMessage = z.infer<typeof inputSchema>;

export function parseServerMessage(text: string): ServerMessage {
  return serverMessageSchema.parse(JSON.parse(text));
}

// Builders run their output through the schema so a coding mistake here
// throws locally instead of reaching the server.
function checked(msg: InputMessage): InputMessage {
  return inputSchema.parse(msg);
}

export const input = {
  pose: (position: Vec3, rotation: Quat) =>
    checked({ v: PROTOCOL_VERSION, type: "input", kind: "pose", position, rotation }),
  head: (position: Vec3) =>
    checked({ v: PROTOCOL_VERSION, type: "input", kind: "head", position }),
  pressures: (raw: number[]) =>
    checked({ v: PROTOCOL_VERSION, type: "input", kind: "pressures", raw }),
  pressure: (face: number, value: number) =>
    checked({ v: PROTOCOL_VERSION, type: "input", kind: "pressure", face, value }),
  hint: () => checked({ v: PROTOCOL_VERSION, type: "input", kind: "hint" }),
  fov: (value: "narrow" | "wide") =>
    checked({ v: PROTOCOL_VERSION, type: "input", kind: "fov", value }),
};
