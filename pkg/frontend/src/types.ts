export interface UiStrokePoint {
  t: number; // seconds relative to stroke start
  x: number; // canvas meters
  y: number;
}

export interface UiStroke {
  points: UiStrokePoint[];
}

export interface ObjectSummary {
  id: string;
  centroid: number[];
  bbox: number[]; // [xmin, ymin, xmax, ymax] canvas meters
  material: string;
  alpha_material: number;
  mass_kg: number;
  primitive: string;
  v_obj: number[];
}

export interface SessionInfo {
  id: string;
  status: string;
  revision: number;
  extent: number[];
  objects: ObjectSummary[];
  frame_count: number;
}

export interface StrokeResponse {
  revision: number;
  objects: ObjectSummary[];
}

export interface GestureResponse {
  object: string;
  v_hand: number[];
  v_obj: number[];
  m_hand: number;
  m_obj: number;
  alpha: number;
  factor: number;
}

export interface BodyFrame {
  id: string;
  position: number[];
  orientation: number[];
  linear_velocity: number[];
  angular_velocity: number[];
}

export interface FrameRecord {
  index: number;
  time: number;
  bodies: BodyFrame[];
  nodes: Record<string, number[][]>;
}

export interface FramesResponse {
  from: number;
  to: number;
  frames: FrameRecord[];
}

export interface ApiError {
  error: string;
  detail: string;
}
